"""Service configuration from environment variables.

All variables are optional and prefixed ``CIVICDP_``:

    CIVICDP_HOST, CIVICDP_PORT        bind address (default 127.0.0.1:8000)
    CIVICDP_TOTAL_BUDGET              default per-session budget (default 4.0)
    CIVICDP_POLICY_FILE               path to a policy JSON file (default: packaged)
    CIVICDP_PROVIDER                  "template" or "external_llm" (default template)
    CIVICDP_LLM_ENDPOINT / _MODEL / _API_KEY / _TIMEOUT
    CIVICDP_PROVIDER_FALLBACK         "1"/"0": fall back to the template on failure (default 1)
    CIVICDP_ALLOW_RAW_EXPORT          "1"/"0": allow downloading the raw upload (default 0)
    CIVICDP_SNAPSHOT_PATH             JSON snapshot written on shutdown, reloaded on start
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from ..dp import DEFAULT_TOTAL_BUDGET
from ..explain import DEFAULT_TIMEOUT_SECONDS, PROVIDER_TEMPLATE, LlmSettings

_TRUTHY = {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    total_budget_default: float = DEFAULT_TOTAL_BUDGET
    policy_file: Optional[Path] = None
    provider: str = PROVIDER_TEMPLATE
    llm: LlmSettings = field(default_factory=LlmSettings)
    fallback_enabled: bool = True
    allow_raw_export: bool = False
    snapshot_path: Optional[Path] = None

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "ServiceConfig":
        env = os.environ if environ is None else environ

        def flag(name: str, default: bool) -> bool:
            raw = env.get(name)
            if raw is None:
                return default
            return raw.strip().lower() in _TRUTHY

        policy_file = env.get("CIVICDP_POLICY_FILE")
        snapshot = env.get("CIVICDP_SNAPSHOT_PATH")
        return cls(
            host=env.get("CIVICDP_HOST", "127.0.0.1"),
            port=int(env.get("CIVICDP_PORT", "8000")),
            total_budget_default=float(env.get("CIVICDP_TOTAL_BUDGET", str(DEFAULT_TOTAL_BUDGET))),
            policy_file=Path(policy_file) if policy_file else None,
            provider=env.get("CIVICDP_PROVIDER", PROVIDER_TEMPLATE),
            llm=LlmSettings(
                endpoint=env.get("CIVICDP_LLM_ENDPOINT", ""),
                model=env.get("CIVICDP_LLM_MODEL", ""),
                api_key=env.get("CIVICDP_LLM_API_KEY", ""),
                timeout_seconds=float(env.get("CIVICDP_LLM_TIMEOUT", str(DEFAULT_TIMEOUT_SECONDS))),
            ),
            fallback_enabled=flag("CIVICDP_PROVIDER_FALLBACK", True),
            allow_raw_export=flag("CIVICDP_ALLOW_RAW_EXPORT", False),
            snapshot_path=Path(snapshot) if snapshot else None,
        )
