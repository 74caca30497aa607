from .commands import verify_cmd  # noqa
