from app.core.utils import FreqFedError
from app.core.utils.exception_handler import exception_handler
from app.federation.management.base import FederationCommand
from app.federation.reports import write_sweep_table
from app.federation.sweep import parse_axis, parse_values, sweep


class Command(FederationCommand):
    help = "Run one federation per value of a parameter and tabulate the results."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--axis", required=True, help="pmr, pdr or iid_rate")
        parser.add_argument("--values", required=True)

    def handle(self, *args, **options):
        try:
            cfg = self.load_config(options)
            axis = parse_axis(options["axis"])
            values = parse_values(options["values"])
            table = sweep(cfg, axis, values)
            path = write_sweep_table(table, cfg.format, cfg.out_dir, axis)
        except (FreqFedError, OSError) as exc:
            raise exception_handler(exc)

        self.stdout.write(self.style.SUCCESS(f"{len(table)} sweep rows at {path}"))
