import tempfile
from pathlib import Path

from django.test import SimpleTestCase, TestCase

from find_markov_gap.database_manage.db_manage import DB_FILENAME, DataBaseManager
from runs.models import GapRunModel, SweepModel


class GapRunModelTests(TestCase):
    def test_runs_belong_to_their_sweep(self):
        sweep = SweepModel.objects.create(key="R", values=[0, 2], config={"SEED": 0})
        GapRunModel.objects.create(sweep=sweep, command="sweep", sweep_value="0", bare_h=0.34, final_h=0.34)
        GapRunModel.objects.create(sweep=sweep, command="sweep", sweep_value="2", error="Margin 2 is below the minimum 4")
        GapRunModel.objects.create(command="run", bare_h=0.34, final_h=0.25, c_plus_estimate=1.08)

        self.assertEqual(sweep.runs.count(), 2)
        self.assertEqual(GapRunModel.objects.filter(sweep__isnull=True).count(), 1)
        self.assertEqual(str(sweep), "Sweep over R: [0, 2]")

    def test_string_form(self):
        ok = GapRunModel.objects.create(command="run", bare_h=0.5, final_h=0.25)
        failed = GapRunModel.objects.create(command="run", error="matrix dimension too large")
        self.assertEqual(str(ok), "run run: bare h=0.500000, final h=0.250000")
        self.assertEqual(str(failed), "run run failed: matrix dimension too large")

    def test_ordering_follows_creation(self):
        first = GapRunModel.objects.create(command="run")
        second = GapRunModel.objects.create(command="sweep")
        self.assertEqual(list(GapRunModel.objects.all()), [first, second])


class DataBaseManagerTests(SimpleTestCase):
    def test_directory_and_file_handling(self):
        with tempfile.TemporaryDirectory() as tmp:
            manager = DataBaseManager(str(Path(tmp) / "nested" / "db"))
            manager.create_db_directory()
            self.assertTrue(manager.db_dir.is_dir())
            self.assertEqual(manager.db_path.name, DB_FILENAME)

            manager.db_path.write_bytes(b"")
            manager.delete_database_file()
            self.assertFalse(manager.db_path.exists())
            # a second delete is a no-op
            manager.delete_database_file()
