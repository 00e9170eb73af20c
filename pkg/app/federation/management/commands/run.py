from app.core.utils import FreqFedError
from app.core.utils.exception_handler import exception_handler
from app.federation.management.base import FederationCommand
from app.federation.reports import report_writer
from app.federation.server import run_federation


class Command(FederationCommand):
    help = "Run one federation and write its per-round report."

    def handle(self, *args, **options):
        try:
            cfg = self.load_config(options)
            writer = report_writer(cfg.format, cfg.out_dir)
            reports = run_federation(cfg, on_report=writer)
        except (FreqFedError, OSError) as exc:
            raise exception_handler(exc)

        final = reports[-1]
        self.stdout.write(
            self.style.SUCCESS(
                f"{len(reports)} rounds: final ma={final.ma:.4f} "
                f"ba={final.ba:.4f}, report at {writer.path}"
            )
        )
