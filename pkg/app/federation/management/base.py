import sys

from django.core.management.base import BaseCommand, CommandError

from app.core.utils.exception_handler import EXIT_CONFIG_ERROR
from app.federation.serializers import load_config


class FederationCommand(BaseCommand):
    """Shared flags of the federation commands.

    Usage errors count as configuration errors and exit with 1, not with
    argparse's 2.
    """

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def error(message):
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                parser.exit(EXIT_CONFIG_ERROR, f"{parser.prog}: error: {message}\n")
            raise CommandError(f"Error: {message}", returncode=EXIT_CONFIG_ERROR)

        parser.error = error
        return parser

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True)
        parser.add_argument("--out-dir", dest="out_dir")
        parser.add_argument("--seed", type=int, dest="master_seed")
        parser.add_argument("--format", dest="format", help="csv or json")

    def load_config(self, options):
        return load_config(
            options["config"],
            out_dir=options["out_dir"],
            master_seed=options["master_seed"],
            format=options["format"],
        )
