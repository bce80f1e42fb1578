import logging
import os
from pathlib import Path
from typing import Optional

import django
from django.core.management import call_command

DB_FILENAME = 'db.sqlite3'


def setup_django(db_dir: Optional[str] = None) -> None:
    """Point the results store at ``db_dir`` (unless MARKOV_GAP_DB_DIR is set) and load Django."""
    if db_dir is not None:
        os.environ.setdefault('MARKOV_GAP_DB_DIR', str(Path(db_dir).resolve()))
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'markov_gap_lab.settings')
    django.setup()


class DataBaseManager:
    """
    Manages the SQLite results database: directory creation, migration, deletion.
    """

    def __init__(self, db_dir: str) -> None:
        """
        :param db_dir: Directory holding the SQLite file.
        """
        self.db_dir = Path(db_dir)
        self.db_path = self.db_dir / DB_FILENAME

    def create_db_directory(self) -> None:
        if not self.db_dir.exists():
            self.db_dir.mkdir(parents=True)
            logging.info(f"Created directory: {self.db_dir}")

    def delete_database_file(self) -> None:
        if self.db_path.exists():
            self.db_path.unlink()
            logging.info(f"Deleted database file {self.db_path}.")
        else:
            logging.info("Database file does not exist, skipping deletion.")

    def migrate_db(self) -> None:
        """
        Applies the runs migrations to set up or update the schema.
        """
        self.create_db_directory()
        setup_django(str(self.db_dir))
        call_command('migrate', verbosity=0)
        logging.info(f"Results database ready at {self.db_path}")

    def prepare(self, reset: bool = False) -> None:
        if reset:
            self.delete_database_file()
        self.migrate_db()
