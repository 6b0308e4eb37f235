import logging
import os
from unittest import mock

import pytest

from cupmod import config


class TestSettings:
    @mock.patch.dict(os.environ, {}, clear=True)
    def test_defaults(self):
        settings = config.Settings.from_env()

        assert settings == config.Settings()
        assert settings.threads == 1
        assert settings.oracle_limit == 200
        assert settings.logging_level == logging.WARNING

    @mock.patch.dict(
        os.environ,
        {
            "CUPMOD_THREADS": "4",
            "CUPMOD_ORACLE_LIMIT": "50",
            "CUPMOD_SEED": "7",
            "CUPMOD_LOG_LEVEL": "debug",
        },
        clear=True,
    )
    def test_reads_prefixed_variables(self):
        settings = config.Settings.from_env()

        assert settings == config.Settings(
            threads=4, oracle_limit=50, seed=7, log_level="DEBUG"
        )
        assert settings.logging_level == logging.DEBUG

    @mock.patch.dict(os.environ, {"THREADS": "8"}, clear=True)
    def test_ignores_unprefixed_variables(self):
        assert config.Settings.from_env().threads == 1

    @pytest.mark.parametrize(
        "environ",
        [
            {"CUPMOD_THREADS": "0"},
            {"CUPMOD_THREADS": "many"},
            {"CUPMOD_ORACLE_LIMIT": "-1"},
            {"CUPMOD_LOG_LEVEL": "LOUD"},
        ],
    )
    def test_rejects_bad_values(self, environ):
        with mock.patch.dict(os.environ, environ, clear=True):
            with pytest.raises(config.ConfigurationError):
                config.Settings.from_env()

    @mock.patch.dict(os.environ, {"CUPMOD_THREADS": "3"}, clear=True)
    def test_get_settings(self):
        assert config.get_settings().threads == 3
