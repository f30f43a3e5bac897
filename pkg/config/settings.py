from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

DEFAULT_API_BASE_URL = "https://api.openai.com/v1"
DEFAULT_API_KEY_ENV = "POTEMKIN_API_KEY"


class Settings(BaseSettings):
    """Process-level settings read from POTEMKIN_* environment variables (and .env)."""

    model_config = SettingsConfigDict(env_prefix="POTEMKIN_", env_file=".env", extra="ignore")

    api_base_url: str = DEFAULT_API_BASE_URL
    log_level: str = "INFO"
    max_live_calls: Optional[int] = None


def get_settings() -> Settings:
    return Settings()
