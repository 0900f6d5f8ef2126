"""
kbqd: kernel-based quadratic distance (KBQD) k-sample tests.

Library entry point. `create_app()` wires configuration and logging the same
way for the CLI, the tools/ scripts and interactive use.
"""
import logging
import sys

from config import Config

_LOG_FORMAT = '%(message)s'


class KBQDApp:
    """Resolved runtime settings shared by the CLI commands."""

    def __init__(self, config_class=Config):
        self.config = {
            key: getattr(config_class, key)
            for key in dir(config_class)
            if key.isupper()
        }

    @property
    def workers(self):
        return max(1, int(self.config.get('WORKERS') or 1))

    def default_plan(self, method='permutation', **overrides):
        """ResamplingPlan filled from config defaults; keyword overrides win."""
        from kbqd.models.plans import ResamplingPlan

        fields = {
            'method': method,
            'B': self.config['B'],
            'b': self.config['SUBSAMPLE_B'],
            'alpha': self.config['ALPHA'],
            'seed': self.config['SEED'],
        }
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return ResamplingPlan(**fields)


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever sys.stderr is at emit time."""

    def __init__(self):
        super().__init__(sys.stderr)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def configure_logging(level='INFO'):
    """Log to stderr so CSV written to stdout stays machine-readable."""
    root = logging.getLogger('kbqd')
    if not any(isinstance(h, _StderrHandler) for h in root.handlers):
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    root.propagate = False
    return root


def create_app(config_class=Config):
    app = KBQDApp(config_class)
    configure_logging(app.config.get('LOG_LEVEL', 'INFO'))
    return app
