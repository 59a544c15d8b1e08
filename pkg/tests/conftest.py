import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo checks")
    config.addinivalue_line("markers", "acceptance: acceptance-criteria gates")
