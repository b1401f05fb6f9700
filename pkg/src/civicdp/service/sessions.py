"""Stateful session workflow: upload, iterative selection, release, sweep.

A session owns one version store, one budget ledger, and an append-only
event history. Selection is free and repeatable; only releases spend budget.
Mutating calls on one session are serialized through its lock (callers queue);
reads need no lock. Distinct sessions are fully independent.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
import uuid
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .. import analysis, dp, explain, mcda
from ..dataset import (
    ClampBounds,
    DatasetVersion,
    Provenance,
    TimeSeriesDataset,
    VersionStore,
)
from ..errors import (
    DatasetAlreadyUploaded,
    NoDatasetUploaded,
    NoSelection,
    UnknownPolicy,
    UnknownSession,
)
from .config import ServiceConfig


@dataclass(frozen=True)
class SessionEvent:
    kind: str
    payload: dict
    timestamp: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "timestamp": self.timestamp}


@dataclass
class ReleaseOutcome:
    version: DatasetVersion
    utility: analysis.UtilityReport
    impact: explain.ImpactReport
    seed: int
    remaining_budget: float


class Session:
    def __init__(
        self,
        session_id: str,
        total_budget: float,
        policy: Optional[mcda.CompliancePolicy],
        config: ServiceConfig,
    ) -> None:
        self.session_id = session_id
        self.store = VersionStore()
        self.ledger = dp.BudgetLedger(total_budget=total_budget)
        self.policy = policy
        self.config = config
        self.current_profile: Optional[mcda.PreferenceProfile] = None
        self.last_selection: Optional[mcda.SelectionResult] = None
        self.history: list[SessionEvent] = []
        self.lock = threading.RLock()

    # -- internal -------------------------------------------------------

    def _append_event(self, kind: str, payload: dict) -> None:
        self.history.append(SessionEvent(kind=kind, payload=payload, timestamp=time.time()))

    def _require_dataset(self) -> DatasetVersion:
        if len(self.store) == 0:
            raise NoDatasetUploaded("upload a dataset before this step")
        return self.store.root()

    # -- workflow steps ---------------------------------------------------

    def upload_dataset(
        self, csv_bytes: bytes, bounds: ClampBounds, fill_missing: bool = False
    ) -> DatasetVersion:
        if len(self.store) > 0:
            raise DatasetAlreadyUploaded("this session already has a dataset")
        version = self.store.ingest_csv(csv_bytes, bounds, fill_missing=fill_missing)
        self._append_event(
            "upload",
            {
                "version_id": version.version_id,
                "shape": list(version.payload.shape),
                "delta_f": bounds.delta_f,
            },
        )
        return version

    def set_preferences(self, profile: mcda.PreferenceProfile) -> mcda.SelectionResult:
        self._require_dataset()
        selection = mcda.select_epsilon(profile, self.store.delta_f, self.policy)
        self.current_profile = profile
        self.last_selection = selection
        self._append_event(
            "selection",
            {
                "profile": asdict(profile),
                "epsilon_star": selection.epsilon_star,
                "cap_applied": selection.cap_applied,
            },
        )
        return selection

    def execute_release(self, seed: Optional[int] = None) -> ReleaseOutcome:
        root = self._require_dataset()
        if self.last_selection is None or self.current_profile is None:
            raise NoSelection("set preferences before releasing")
        epsilon = self.last_selection.epsilon_star
        if seed is None:
            seed = secrets.randbits(63)

        noisy = dp.privatize(self.store, root, epsilon, self.store.delta_f, self.ledger, seed)
        utility = analysis.compute_mae(root, noisy)
        remaining = dp.remaining_budget(self.ledger)
        payload = root.payload
        context = explain.ImpactContext(
            epsilon=epsilon,
            delta_f=self.store.delta_f,
            mae=utility.mae,
            expected_mae=utility.expected_mae,
            dataset_summary=explain.DatasetSummary(
                series_count=len(payload.series_ids),
                timestamp_count=len(payload.timestamps),
                unit_label=payload.unit_label,
            ),
            profile=self.current_profile,
            remaining_budget=remaining,
            cap_applied=self.last_selection.cap_applied,
        )
        impact = explain.generate_report(
            context,
            provider_choice=self.config.provider,
            llm=self.config.llm,
            fallback_enabled=self.config.fallback_enabled,
        )
        self._append_event(
            "release",
            {
                "version_id": noisy.version_id,
                "epsilon": epsilon,
                "seed": seed,
                "mae": utility.mae,
                "privacy_score": impact.privacy_score,
            },
        )
        return ReleaseOutcome(
            version=noisy,
            utility=utility,
            impact=impact,
            seed=seed,
            remaining_budget=remaining,
        )

    def run_sweep(
        self,
        grid: Optional[list[float]] = None,
        seeds_per_point: Optional[int] = None,
        base_seed: int = 0,
    ) -> analysis.SweepResult:
        root = self._require_dataset()
        sweep = analysis.sweep_epsilon(
            root,
            grid if grid is not None else mcda.DEFAULT_GRID,
            self.store.delta_f,
            seeds_per_point=seeds_per_point or analysis.DEFAULT_SEEDS_PER_POINT,
            base_seed=base_seed,
        )
        self._append_event(
            "sweep",
            {"grid": list(sweep.grid), "seeds_per_point": sweep.seeds_per_point},
        )
        return sweep

    # -- read surfaces --------------------------------------------------

    def ledger_snapshot(self) -> dict:
        return {
            "total_budget": self.ledger.total_budget,
            "spent": self.ledger.spent,
            "remaining": dp.remaining_budget(self.ledger),
            "entries": [asdict(entry) for entry in self.ledger.entries],
        }

    def version_tree(self) -> list[dict]:
        out = []
        for version in self.store.versions():
            record = {
                "version_id": version.version_id,
                "parent_id": version.parent_id,
                "shape": list(version.payload.shape),
            }
            if version.provenance is not None:
                record["provenance"] = asdict(version.provenance)
            out.append(record)
        return out

    def history_snapshot(self) -> dict:
        return {
            "session_id": self.session_id,
            "events": [event.to_dict() for event in self.history],
            "ledger": self.ledger_snapshot(),
            "versions": self.version_tree(),
        }

    # -- persistence -----------------------------------------------------

    def to_snapshot(self) -> dict:
        versions = []
        for version in self.store.versions():
            payload = version.payload
            versions.append(
                {
                    "version_id": version.version_id,
                    "parent_id": version.parent_id,
                    "series_ids": list(payload.series_ids),
                    "timestamps": list(payload.timestamps),
                    "values": payload.values.tolist(),
                    "unit_label": payload.unit_label,
                    "provenance": asdict(version.provenance) if version.provenance else None,
                }
            )
        return {
            "session_id": self.session_id,
            "total_budget": self.ledger.total_budget,
            "entries": [asdict(entry) for entry in self.ledger.entries],
            "policy": asdict(self.policy) if self.policy else None,
            "bounds": asdict(self.store.bounds) if self.store.bounds else None,
            "profile": asdict(self.current_profile) if self.current_profile else None,
            "events": [event.to_dict() for event in self.history],
            "versions": versions,
        }

    @classmethod
    def from_snapshot(cls, snapshot: dict, config: ServiceConfig) -> "Session":
        policy = mcda.CompliancePolicy(**snapshot["policy"]) if snapshot.get("policy") else None
        session = cls(
            session_id=snapshot["session_id"],
            total_budget=snapshot["total_budget"],
            policy=policy,
            config=config,
        )
        bounds = ClampBounds(**snapshot["bounds"]) if snapshot.get("bounds") else None
        for record in snapshot.get("versions", []):
            payload = TimeSeriesDataset(
                series_ids=tuple(record["series_ids"]),
                timestamps=tuple(record["timestamps"]),
                values=np.asarray(record["values"], dtype=float),
                unit_label=record["unit_label"],
            )
            if record["version_id"] == 0:
                session.store.add_root(payload, bounds)
            else:
                parent = session.store.get(record["parent_id"])
                session.store.fork(parent, payload, Provenance(**record["provenance"]))
        for entry in snapshot.get("entries", []):
            session.ledger.entries.append(dp.BudgetEntry(**entry))
        session.history = [
            SessionEvent(kind=e["kind"], payload=e["payload"], timestamp=e["timestamp"])
            for e in snapshot.get("events", [])
        ]
        if snapshot.get("profile"):
            session.current_profile = mcda.PreferenceProfile(**snapshot["profile"])
            # selection is deterministic, so resuming recomputes it exactly
            session.last_selection = mcda.select_epsilon(
                session.current_profile, session.store.delta_f, session.policy
            )
        return session


class SessionManager:
    """Registry of live sessions plus optional JSON snapshot persistence."""

    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        self.policies = mcda.load_policies(config.policy_file)
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create_session(
        self,
        total_budget: Optional[float] = None,
        policy_name: Optional[str] = None,
    ) -> Session:
        policy = None
        if policy_name is not None:
            if policy_name not in self.policies:
                raise UnknownPolicy(
                    f"unknown policy {policy_name!r}; available: {sorted(self.policies)}"
                )
            policy = self.policies[policy_name]
        session = Session(
            session_id=uuid.uuid4().hex,
            total_budget=total_budget if total_budget is not None else self.config.total_budget_default,
            policy=policy,
            config=self.config,
        )
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session {session_id!r}")
        return session

    def save_snapshot(self, path: Optional[Path] = None) -> None:
        target = path or self.config.snapshot_path
        if target is None:
            return
        with self._lock:
            sessions = list(self._sessions.values())
        payload = {"sessions": [session.to_snapshot() for session in sessions]}
        target = Path(target)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(payload))

    def load_snapshot(self, path: Optional[Path] = None) -> int:
        source = path or self.config.snapshot_path
        if source is None or not Path(source).exists():
            return 0
        payload = json.loads(Path(source).read_text())
        count = 0
        for record in payload.get("sessions", []):
            session = Session.from_snapshot(record, self.config)
            with self._lock:
                self._sessions[session.session_id] = session
            count += 1
        return count
