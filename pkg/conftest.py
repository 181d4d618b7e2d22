"""Pytest wiring: absl flags are never parsed when tests run under pytest."""

from absl import flags


def pytest_configure(config):
  del config
  if not flags.FLAGS.is_parsed():
    flags.FLAGS.mark_as_parsed()
