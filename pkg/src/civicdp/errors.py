"""Error types shared across the package.

Every error carries a stable ``code`` (the closed set the HTTP API exposes),
a ``retryable`` hint, and the HTTP status the service maps it to. Module code
raises these directly; the service layer serializes them without translation.
"""

from __future__ import annotations


class CivicDpError(Exception):
    """Base class for all domain errors."""

    code = "internal_error"
    retryable = False
    http_status = 500


# --- dataset ---------------------------------------------------------------

class MalformedCsv(CivicDpError):
    code = "malformed_csv"
    retryable = True
    http_status = 400


class EmptyDataset(CivicDpError):
    code = "empty_dataset"
    retryable = True
    http_status = 400


class NonMonotonicTimestamps(CivicDpError):
    code = "non_monotonic_timestamps"
    retryable = True
    http_status = 400


class ShapeMismatch(CivicDpError):
    code = "shape_mismatch"
    retryable = False
    http_status = 400


class UnknownVersion(CivicDpError):
    code = "unknown_version"
    retryable = False
    http_status = 404


# --- mcda ------------------------------------------------------------------

class EmptyGrid(CivicDpError):
    code = "empty_grid"
    retryable = True
    http_status = 400


class GridOutsideSafeRange(CivicDpError):
    code = "grid_outside_safe_range"
    retryable = True
    http_status = 400


class DimensionMismatch(CivicDpError):
    code = "dimension_mismatch"
    retryable = False
    http_status = 400


class NoFeasibleAlternative(CivicDpError):
    code = "no_feasible_alternative"
    retryable = False
    http_status = 409


class UnknownPolicy(CivicDpError):
    code = "unknown_policy"
    retryable = True
    http_status = 404


# --- dp --------------------------------------------------------------------

class BudgetExceeded(CivicDpError):
    code = "budget_exceeded"
    retryable = False
    http_status = 409


class EpsilonOutsideSafeRange(CivicDpError):
    code = "epsilon_outside_safe_range"
    retryable = True
    http_status = 400


class NoisingNoisyData(CivicDpError):
    code = "noising_noisy_data"
    retryable = False
    http_status = 409


# --- analysis ----------------------------------------------------------------

class UnrelatedVersions(CivicDpError):
    code = "unrelated_versions"
    retryable = False
    http_status = 400


class DegenerateInput(CivicDpError):
    code = "degenerate_input"
    retryable = True
    http_status = 400


# --- explain -----------------------------------------------------------------

class ProviderUnavailable(CivicDpError):
    code = "provider_unavailable"
    retryable = True
    http_status = 503


class MalformedProviderResponse(CivicDpError):
    code = "malformed_provider_response"
    retryable = True
    http_status = 502


# --- service -----------------------------------------------------------------

class UnknownSession(CivicDpError):
    code = "unknown_session"
    retryable = False
    http_status = 404


class DatasetAlreadyUploaded(CivicDpError):
    code = "dataset_already_uploaded"
    retryable = False
    http_status = 409


class NoDatasetUploaded(CivicDpError):
    code = "no_dataset_uploaded"
    retryable = True
    http_status = 409


class NoSelection(CivicDpError):
    code = "no_selection"
    retryable = True
    http_status = 409


class RawExportDisabled(CivicDpError):
    code = "raw_export_disabled"
    retryable = False
    http_status = 403
