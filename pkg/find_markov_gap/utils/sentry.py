import logging
from typing import Optional

import sentry_sdk
from sentry_sdk.integrations.logging import LoggingIntegration


def init_sentry(sentry_dsn: Optional[str], environment: Optional[str] = None) -> bool:
    """Initialize Sentry error tracking; returns whether a DSN was configured."""
    sentry_logging = LoggingIntegration(
        level=logging.INFO,  # breadcrumbs
        event_level=logging.ERROR,
    )
    if not sentry_dsn:
        logging.warning("SENTRY_DSN not found. Sentry initialization skipped.")
        return False
    sentry_sdk.init(
        dsn=sentry_dsn,
        environment=environment or "development",
        traces_sample_rate=0.0,
        integrations=[sentry_logging],
    )
    logging.info("Sentry initialized.")
    return True
