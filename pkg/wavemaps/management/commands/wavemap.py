# wavemaps/management/commands/wavemap.py
from django.core.management.base import BaseCommand, CommandError

from wavemaps import checks
from wavemaps.exceptions import WavemapError
from wavemaps.pipelines import SUBCOMMANDS, execute, load_config
from wavemaps.serializers import RunRecordSerializer


class Command(BaseCommand):
    help = (
        "Run a near-soliton wave map pipeline: eigen, transform, evolve, profile, construct, classify or "
        "crosscheck. The config is a JSON file with sections grid, frequency, window, tolerances, datum and fd; "
        "omitted entries take their documented defaults. Exit codes: 0 pass, 2 certificate failure, "
        "3 convergence failure, 4 config error."
    )

    def add_arguments(self, parser):
        parser.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS)
        parser.add_argument("--config", help="RunConfig JSON file, or the manifest.json of an earlier run")
        parser.add_argument("--workers", type=int, help="worker threads (default WAVEMAPS_WORKERS)")
        parser.add_argument("--output-dir", help="artifact root (default WAVEMAPS_OUTPUT_DIR)")
        parser.add_argument("--cache-dir", help="eigenbasis cache (default WAVEMAPS_CACHE_DIR)")
        parser.add_argument("--list-checks", action="store_true", help="list every audit with its formula anchor")

    def handle(self, *args, **options):
        if options["list_checks"]:
            self._list_checks(options["subcommand"])
            return
        if not options["subcommand"]:
            raise CommandError("a subcommand is required unless --list-checks is given", returncode=4)
        if options["workers"] is not None and options["workers"] < 1:
            raise CommandError("--workers must be at least 1", returncode=4)
        try:
            data = load_config(options["config"])
            record = execute(
                options["subcommand"], data, output_dir=options["output_dir"],
                workers=options["workers"], cache_dir=options["cache_dir"],
            )
        except WavemapError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

        summary = RunRecordSerializer(record).data
        for check in summary["checks"]:
            mark = self.style.SUCCESS("PASS") if check["passed"] else self.style.ERROR("FAIL")
            self.stdout.write(f"{mark} {check['name']}: {check['value']}")
        self.stdout.write(f"Artifacts in {record.output_dir} (config {record.config_hash[:12]})")
        if record.exit_code:
            raise CommandError("certificate failure", returncode=record.exit_code)
        self.stdout.write(self.style.SUCCESS(f"{record.subcommand} passed."))

    def _list_checks(self, subcommand):
        for check in checks.CHECKS:
            if subcommand and check.subcommand != subcommand:
                continue
            self.stdout.write(f"{check.name} [{check.subcommand}/{check.module}] {check.anchor}")
            self.stdout.write(f"    {check.description}")
