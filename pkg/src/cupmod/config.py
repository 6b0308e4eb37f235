import dataclasses
import logging

import environs
from typing_extensions import Self


class ConfigurationError(Exception):
    pass


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclasses.dataclass(frozen=True, kw_only=True)
class Settings:
    threads: int = 1
    oracle_limit: int = 200
    seed: int = 0
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, env: environs.Env | None = None) -> Self:
        """
        Read ``CUPMOD_*`` variables, falling back to the defaults above.
        """
        if env is None:
            env = environs.Env()
        try:
            with env.prefixed("CUPMOD_"):
                settings = cls(
                    threads=env.int("THREADS", 1),
                    oracle_limit=env.int("ORACLE_LIMIT", 200),
                    seed=env.int("SEED", 0),
                    log_level=env.str("LOG_LEVEL", "WARNING").upper(),
                )
        except environs.EnvError as exc:
            raise ConfigurationError(str(exc)) from exc
        settings.validate()
        return settings

    def validate(self) -> None:
        if self.threads < 1:
            raise ConfigurationError(
                f"CUPMOD_THREADS must be at least 1, got {self.threads}."
            )
        if self.oracle_limit < 0:
            raise ConfigurationError(
                f"CUPMOD_ORACLE_LIMIT must not be negative, got {self.oracle_limit}."
            )
        if self.log_level not in LOG_LEVELS:
            raise ConfigurationError(
                f"CUPMOD_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, "
                f"got {self.log_level!r}."
            )

    @property
    def logging_level(self) -> int:
        return int(getattr(logging, self.log_level))


def get_settings() -> Settings:
    return Settings.from_env()
