import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

import pandas as pd
import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from app.core.utils import DivergedTrainingError, RoundFailedError
from app.core.utils.exception_handler import EXIT_CONFIG_ERROR, EXIT_RUNTIME_ERROR
from app.federation.management.commands.run import Command as RunCommand
from app.federation.tests.factories import FederationDocumentFactory
from app.federation.types import REPORT_COLUMNS


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.out_dir = self.root / "out"

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, **kwargs):
        path = self.root / "config.yml"
        path.write_text(yaml.safe_dump(FederationDocumentFactory(**kwargs)))
        return str(path)

    def call(self, name, *args, **options):
        out = StringIO()
        call_command(name, *args, stdout=out, out_dir=str(self.out_dir), **options)
        return out.getvalue()


class RunCommandTestCase(CommandTestCase):
    def test_it_should_write_the_round_report(self):
        output = self.call("run", config=self.write_config(rounds=2))

        frame = pd.read_csv(self.out_dir / "rounds.csv")
        self.assertEqual(list(frame.columns), REPORT_COLUMNS)
        self.assertEqual(frame["round"].tolist(), [1, 2])
        self.assertIn("2 rounds", output)

    def test_run_json_format(self):
        self.call("run", config=self.write_config(rounds=1), format="json")

        self.assertTrue((self.out_dir / "rounds.json").exists())

    def test_run_invalid_config(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("run", config=self.write_config(rounds=0))

        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG_ERROR)
        self.assertIn("rounds", str(ctx.exception))

    def test_run_unknown_format(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("run", config=self.write_config(), format="xml")

        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG_ERROR)

    def test_seed_not_an_integer(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("run", "--seed", "abc", config=self.write_config())

        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG_ERROR)
        self.assertIn("--seed", str(ctx.exception))

    def test_missing_config_flag(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("run")

        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG_ERROR)
        self.assertIn("--config", str(ctx.exception))

    def test_usage_error_from_the_command_line(self):
        stderr = StringIO()

        with patch("sys.stderr", stderr):
            with self.assertRaises(SystemExit) as ctx:
                RunCommand().run_from_argv(["manage.py", "run", "--seed", "abc"])

        self.assertEqual(ctx.exception.code, EXIT_CONFIG_ERROR)
        self.assertIn("--seed", stderr.getvalue())

    def test_run_round_failure(self):
        failure = RoundFailedError(1, DivergedTrainingError())

        with patch(
            "app.federation.management.commands.run.run_federation",
            side_effect=failure,
        ):
            with self.assertRaises(CommandError) as ctx:
                self.call("run", config=self.write_config())

        self.assertEqual(ctx.exception.returncode, EXIT_RUNTIME_ERROR)
        self.assertIn("Round 1", str(ctx.exception))


class SweepCommandTestCase(CommandTestCase):
    def test_it_should_write_the_sweep_table(self):
        config = self.write_config(attack="label_flip", pmr=0.34, rounds=1)

        self.call("sweep", config=config, axis="pdr", values="0.2,0.8")

        frame = pd.read_csv(self.out_dir / "sweep_pdr.csv")
        self.assertEqual(frame["value"].tolist(), [0.2, 0.8])

    def test_sweep_unknown_axis(self):
        config = self.write_config(attack="label_flip", pmr=0.34)

        with self.assertRaises(CommandError) as ctx:
            self.call("sweep", config=config, axis="lr", values="0.1")

        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG_ERROR)

    def test_sweep_without_values(self):
        config = self.write_config(attack="label_flip", pmr=0.34)

        with self.assertRaises(CommandError) as ctx:
            self.call("sweep", config=config, axis="pdr")

        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG_ERROR)
