"""
This module provides the CLI interface for the quasi-interpolation experiments.

Usage:
    gmq-quasi fourier --c 1 --d 1 --n 1 --s 1     # phi_hat with oracle cross-check
    gmq-quasi coeffs --d 3 --support 5             # build and save a stencil
    gmq-quasi converge --config configs/converge_1d_d1.yaml --check

Exit codes: 0 success, 1 invalid config or infeasible construction, 2 numerical failure,
3 acceptance check failed under --check. Errors are printed as JSON on stderr.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Optional

import click
import typer
from pydantic import ValidationError

from .errors import ParameterError, QuasiInterpError
from .runner import execute_experiment, resolve_config

# CLI root application
app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    rich_markup_mode=None,  # Disable rich output to fix Python 3.13 compatibility
    help="""Generalized Multiquadric Quasi-Interpolation

Experiments with phi(x) = sqrt(c^(2d) + |x|^(2d)) on the lattice Z^n:
- Generalized Fourier transform (residue series, quadrature oracle, small-s behaviour)
- Quasi-Lagrange coefficients from moment and flatness conditions
- Decay, partition of unity, polynomial reproduction and convergence orders
""",
)

ConfigOpt = typer.Option(None, "--config", help="YAML/JSON config file (may use 'extends')")
COpt = typer.Option(None, "--c", help="Shape parameter c >= 0")
DOpt = typer.Option(None, "--d", help="Generalization exponent d >= 1")
NOpt = typer.Option(None, "--n", help="Dimension n >= 1")
SupportOpt = typer.Option(None, "--support", help="Stencil support radius")
RadiusOpt = typer.Option(None, "--radius", help="Lattice truncation radius R")
TolOpt = typer.Option(None, "--tol", help="Numerical tolerance")
OutOpt = typer.Option(None, "--out", help="Output directory")
CheckOpt = typer.Option(False, "--check", help="Exit 3 when an acceptance check fails")


def _error(payload: Dict[str, Any], code: int) -> None:
    typer.echo(json.dumps(payload), err=True)
    raise typer.Exit(code)


def _parse_h_list(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        err = ParameterError(f"--h-list must be comma-separated numbers, got '{text}'")
        _error(err.to_dict(), err.exit_code)


def _overrides(**flags) -> Dict[str, Any]:
    """Map flags onto the config tree, skipping the ones not given."""
    mapping = {
        "c": ("params", "c"),
        "d": ("params", "d"),
        "n": ("params", "n"),
        "s": ("fourier", "s"),
        "tol": ("fourier", "tol"),
        "support": ("stencil", "support_radius"),
        "radius": ("lattice", "truncation_radius"),
        "h_list": ("experiment", "h_list"),
        "r": ("experiment", "separation"),
        "out": ("io", "out_dir"),
    }
    out: Dict[str, Any] = {}
    for name, value in flags.items():
        if value is None:
            continue
        if name == "check":
            if value:
                out["check"] = True
            continue
        section, key = mapping[name]
        out.setdefault(section, {})[key] = value
    return out


def _run(name: str, config: Optional[str], **flags) -> None:
    try:
        cfg = resolve_config(config, _overrides(**flags))
        _, _, summary = execute_experiment(name, cfg)
    except QuasiInterpError as e:
        _error(e.to_dict(), e.exit_code)
    except ValidationError as e:
        _error(
            {"error": "ValidationError", "message": str(e), "exit_code": 1, "details": {"errors": json.loads(e.json())}},
            1,
        )
    except (FileNotFoundError, ValueError) as e:
        _error({"error": type(e).__name__, "message": str(e), "exit_code": 1, "details": {}}, 1)
    typer.echo(summary)


@app.command("fourier", help="Evaluate phi_hat(s) by residue series, with oracle and Bessel cross-checks")
def fourier_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    s: Optional[float] = typer.Option(None, "--s", help="Radial frequency s > 0"),
    tol: Optional[float] = TolOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("fourier", config, c=c, d=d, n=n, s=s, tol=tol, out=out, check=check)


@app.command("asymp", help="Classify the s -> 0 behaviour of phi_hat and check the leading term")
def asymp_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("asymp", config, c=c, d=d, n=n, out=out, check=check)


@app.command("expand", help="Small-s expansion of phi_hat up to the first logarithmic term")
def expand_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("expand", config, c=c, d=d, n=n, out=out, check=check)


@app.command("coeffs", help="Construct the quasi-Lagrange stencil and report moment residuals")
def coeffs_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    support: Optional[int] = SupportOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("coeffs", config, c=c, d=d, n=n, support=support, out=out, check=check)


@app.command("flatness", help="Measure the vanishing order of Psi_hat - delta at 0 and 2*pi*j")
def flatness_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    support: Optional[int] = SupportOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("flatness", config, c=c, d=d, n=n, support=support, out=out, check=check)


@app.command("psi", help="Evaluate Psi and its partition-of-unity residual")
def psi_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    support: Optional[int] = SupportOpt,
    radius: Optional[int] = RadiusOpt,
    tol: Optional[float] = TolOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("psi", config, c=c, d=d, n=n, support=support, radius=radius, tol=tol, out=out, check=check)


@app.command("decay", help="Fit the decay slope of Psi along fixed directions")
def decay_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    support: Optional[int] = SupportOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("decay", config, c=c, d=d, n=n, support=support, out=out, check=check)


@app.command("reproduce", help="Residuals of Q_1 on monomials of increasing degree")
def reproduce_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    support: Optional[int] = SupportOpt,
    radius: Optional[int] = RadiusOpt,
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("reproduce", config, c=c, d=d, n=n, support=support, radius=radius, out=out, check=check)


@app.command("converge", help="Sup-norm error of Q_h f over h_list and the fitted order")
def converge_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    support: Optional[int] = SupportOpt,
    radius: Optional[int] = RadiusOpt,
    h_list: Optional[str] = typer.Option(None, "--h-list", help="Comma-separated step sizes, halving"),
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run(
        "converge", config, c=c, d=d, n=n, support=support, radius=radius,
        h_list=_parse_h_list(h_list), out=out, check=check,
    )


@app.command("pd-check", help="Eigenvalues of the 2x2 interpolation matrix (not positive definite)")
def pd_check_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    r: Optional[float] = typer.Option(None, "--r", help="Separation of the two centers"),
    out: Optional[str] = OutOpt,
    check: bool = CheckOpt,
    config: Optional[str] = ConfigOpt,
):
    _run("pd-check", config, c=c, d=d, r=r, out=out, check=check)


@app.command("conjecture", help="Measured order against the proven 2d and conjectured n-1+2d")
def conjecture_cmd(
    c: Optional[float] = COpt,
    d: Optional[int] = DOpt,
    n: Optional[int] = NOpt,
    support: Optional[int] = SupportOpt,
    radius: Optional[int] = RadiusOpt,
    h_list: Optional[str] = typer.Option(None, "--h-list", help="Comma-separated step sizes, halving"),
    out: Optional[str] = OutOpt,
    config: Optional[str] = ConfigOpt,
):
    _run(
        "conjecture", config, c=c, d=d, n=n, support=support, radius=radius,
        h_list=_parse_h_list(h_list), out=out,
    )


def _is_click_error(e: Exception) -> bool:
    if isinstance(e, click.ClickException):
        return True
    # typer may raise its own copy of click's exception classes
    return any(cls.__name__ == "ClickException" for cls in type(e).__mro__)


def run(argv: Optional[List[str]] = None) -> int:
    """Run the CLI on argv and return the exit code instead of exiting."""
    try:
        code = app(args=argv, standalone_mode=False)
    except typer.Exit as e:
        return e.exit_code
    except Exception as e:
        if not _is_click_error(e):
            raise
        payload = {
            "error": "UsageError",
            "message": e.format_message(),
            "exit_code": 1,
            "details": {"kind": type(e).__name__},
        }
        typer.echo(json.dumps(payload), err=True)
        return 1
    return int(code or 0)


def entrypoint():
    """Entry point for the CLI tool."""
    raise SystemExit(run())


if __name__ == "__main__":
    entrypoint()
