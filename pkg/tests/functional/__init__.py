# Functional tests
