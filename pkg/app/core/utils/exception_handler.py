"""Maps testbed errors to management-command exit codes."""
import logging

from django.core.management.base import CommandError

from app.core.utils.exceptions import ConfigurationError, FreqFedError

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def _format_errors(errors):
    lines = []
    for field, messages in sorted(errors.items()):
        if not isinstance(messages, (list, tuple)):
            messages = [messages]
        lines.extend(f"  {field}: {message}" for message in messages)
    return lines


def exception_handler(exc) -> CommandError:
    if isinstance(exc, ConfigurationError):
        returncode = EXIT_CONFIG_ERROR
        message = "\n".join([str(exc.detail), *_format_errors(exc.errors)])
    elif isinstance(exc, FreqFedError):
        returncode = EXIT_RUNTIME_ERROR
        message = str(exc.detail)
    else:
        returncode = EXIT_RUNTIME_ERROR
        message = f"Unexpected failure: {exc}"

    code = getattr(exc, "code", "unexpected")
    logger.error(f"[{code}] {message}")
    return CommandError(message, returncode=returncode)
