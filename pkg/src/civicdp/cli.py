"""Batch command-line front end: synthetic data, one-shot runs, sweeps, and
the canonical profile comparison. The CLI calls the core modules directly, so
desk-scale reproduction never needs a running server.

Exit codes: 0 success, 1 usage error, 2 pipeline error.
"""

from __future__ import annotations

import json
import secrets
import sys
from pathlib import Path
from typing import Optional

import click

from . import analysis, dp, explain, mcda
from .dataset import (
    DEFAULT_BOUNDS,
    ClampBounds,
    VersionStore,
    generate_synthetic,
    to_csv_bytes,
)
from .errors import CivicDpError, UnknownPolicy

CANONICAL_PROFILES = {
    "privacy-first": mcda.PreferenceProfile(
        privacy=5, accuracy=1, compliance_required=True, sensitivity=3
    ),
    "balanced": mcda.PreferenceProfile(
        privacy=3, accuracy=3, compliance_required=False, sensitivity=2
    ),
    "utility-first": mcda.PreferenceProfile(
        privacy=1, accuracy=5, compliance_required=False, sensitivity=1
    ),
}
# privacy-first runs under the permissive cap at the top of the safe range
CANONICAL_POLICY = mcda.CompliancePolicy(
    name="open", epsilon_cap=2.0, description="top of the safe range"
)

_PROFILE_HELP = (
    "Canonical profiles: privacy-first = sliders (privacy 5, accuracy 1, "
    "compliance yes with cap 2.0, sensitivity 3); balanced = (3, 3, no, 2); "
    "utility-first = (1, 5, no, 1)."
)

_MAX_SEED = 2 ** 64


def _positive_int(_ctx, param, value):
    if value is not None and value < 1:
        raise click.BadParameter(f"{param.name} must be >= 1")
    return value


def _parse_grid(_ctx, _param, value):
    if value is None:
        return None
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter("grid must be comma-separated numbers") from None


format_option = click.option(
    "--format",
    "output_format",
    type=click.Choice(["table", "json", "csv"]),
    default="table",
    show_default=True,
    help="stdout format",
)


@click.group()
def cli() -> None:
    """Participatory differential-privacy configuration toolkit."""


@cli.command()
@click.option("--households", type=int, default=200, show_default=True, callback=_positive_int)
@click.option("--days", type=int, default=1, show_default=True, callback=_positive_int)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
def generate(households: int, days: int, seed: int, out_path: Path) -> None:
    """Write a synthetic residential-load CSV in the dataset format."""
    dataset = generate_synthetic(households, days, seed)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(to_csv_bytes(dataset))
    click.echo(f"wrote {dataset.shape[0]} series x {dataset.shape[1]} timestamps to {out_path}")


def _run_pipeline(
    csv_path: Path,
    bounds: ClampBounds,
    profile: mcda.PreferenceProfile,
    policy: Optional[mcda.CompliancePolicy],
    seed: int,
    fill_missing: bool,
    provider: str,
):
    raw = csv_path.read_bytes()
    store = VersionStore()
    root = store.ingest_csv(raw, bounds, fill_missing=fill_missing)
    selection = mcda.select_epsilon(profile, store.delta_f, policy)
    ledger = dp.BudgetLedger()
    noisy = dp.privatize(store, root, selection.epsilon_star, store.delta_f, ledger, seed)
    utility = analysis.compute_mae(root, noisy)
    payload = root.payload
    context = explain.ImpactContext(
        epsilon=selection.epsilon_star,
        delta_f=store.delta_f,
        mae=utility.mae,
        expected_mae=utility.expected_mae,
        dataset_summary=explain.DatasetSummary(
            series_count=len(payload.series_ids),
            timestamp_count=len(payload.timestamps),
            unit_label=payload.unit_label,
        ),
        profile=profile,
        remaining_budget=dp.remaining_budget(ledger),
        cap_applied=selection.cap_applied,
    )
    impact = explain.generate_report(context, provider_choice=provider)
    return selection, noisy, utility, impact


@cli.command(epilog=_PROFILE_HELP)
@click.argument("csv_path", type=click.Path(path_type=Path))
@click.option("--lower", type=float, default=DEFAULT_BOUNDS.lower, show_default=True)
@click.option("--upper", type=float, default=DEFAULT_BOUNDS.upper, show_default=True)
@click.option("--privacy", type=click.IntRange(1, 5), default=3, show_default=True)
@click.option("--accuracy", type=click.IntRange(1, 5), default=3, show_default=True)
@click.option("--compliance/--no-compliance", default=False, show_default=True)
@click.option("--sensitivity", type=click.IntRange(1, 3), default=2, show_default=True)
@click.option("--policy", "policy_name", type=str, default=None, help="compliance policy name")
@click.option(
    "--policy-file", type=click.Path(dir_okay=False, path_type=Path), default=None,
    help="policy JSON (defaults to the packaged file)",
)
@click.option("--seed", type=int, default=None, help="noise seed (random when omitted)")
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), default=Path("out"), show_default=True)
@click.option("--fill-missing", is_flag=True, default=False)
@click.option(
    "--provider", type=click.Choice([explain.PROVIDER_TEMPLATE, explain.PROVIDER_EXTERNAL]),
    default=explain.PROVIDER_TEMPLATE, show_default=True,
)
@format_option
def run(
    csv_path: Path,
    lower: float,
    upper: float,
    privacy: int,
    accuracy: int,
    compliance: bool,
    sensitivity: int,
    policy_name: Optional[str],
    policy_file: Optional[Path],
    seed: Optional[int],
    out_dir: Path,
    fill_missing: bool,
    provider: str,
    output_format: str,
) -> None:
    """Run the full pipeline once: ingest, select, privatize, report."""
    profile = mcda.PreferenceProfile(
        privacy=privacy,
        accuracy=accuracy,
        compliance_required=compliance,
        sensitivity=sensitivity,
    )
    policy = None
    if policy_name is not None:
        policies = mcda.load_policies(policy_file)
        if policy_name not in policies:
            raise UnknownPolicy(f"unknown policy {policy_name!r}; available: {sorted(policies)}")
        policy = policies[policy_name]
    if seed is None:
        seed = secrets.randbits(63)

    bounds = ClampBounds(lower=lower, upper=upper)
    selection, noisy, utility, impact = _run_pipeline(
        csv_path, bounds, profile, policy, seed, fill_missing, provider
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    noisy_path = out_dir / "noisy.csv"
    utility_path = out_dir / "utility_report.json"
    impact_path = out_dir / "impact_report.json"
    noisy_path.write_bytes(to_csv_bytes(noisy.payload))
    utility_path.write_text(json.dumps(utility.to_dict(), indent=2))
    impact_path.write_text(json.dumps(impact.to_dict(), indent=2))

    summary = {
        "epsilon_star": selection.epsilon_star,
        "mae": utility.mae,
        "expected_mae": utility.expected_mae,
        "privacy_score": impact.privacy_score,
        "seed": seed,
        "outputs": [str(noisy_path), str(utility_path), str(impact_path)],
    }
    if output_format == "json":
        click.echo(json.dumps(summary, indent=2))
    elif output_format == "csv":
        click.echo("key,value")
        for key in ("epsilon_star", "mae", "expected_mae", "privacy_score", "seed"):
            click.echo(f"{key},{summary[key]}")
    else:
        click.echo(f"epsilon_star:  {selection.epsilon_star:g}")
        click.echo(f"mae:           {utility.mae:.6g}")
        click.echo(f"expected_mae:  {utility.expected_mae:.6g}")
        click.echo(f"privacy_score: {impact.privacy_score:.1f}")
        click.echo(f"seed:          {seed}")
        click.echo(f"outputs:       {noisy_path} {utility_path} {impact_path}")


@cli.command()
@click.argument("csv_path", type=click.Path(path_type=Path))
@click.option("--lower", type=float, default=DEFAULT_BOUNDS.lower, show_default=True)
@click.option("--upper", type=float, default=DEFAULT_BOUNDS.upper, show_default=True)
@click.option("--grid", callback=_parse_grid, default=None, help="comma-separated epsilon values")
@click.option("--seeds-per-point", type=int, default=analysis.DEFAULT_SEEDS_PER_POINT,
              show_default=True, callback=_positive_int)
@click.option("--base-seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              default=Path("sweep.json"), show_default=True)
@click.option("--fill-missing", is_flag=True, default=False)
@format_option
def sweep(
    csv_path: Path,
    lower: float,
    upper: float,
    grid: Optional[list[float]],
    seeds_per_point: int,
    base_seed: int,
    out_path: Path,
    fill_missing: bool,
    output_format: str,
) -> None:
    """Simulate releases across an epsilon grid and chart MAE against it."""
    raw = csv_path.read_bytes()
    store = VersionStore()
    bounds = ClampBounds(lower=lower, upper=upper)
    root = store.ingest_csv(raw, bounds, fill_missing=fill_missing)
    result = analysis.sweep_epsilon(
        root,
        grid if grid is not None else mcda.DEFAULT_GRID,
        store.delta_f,
        seeds_per_point=seeds_per_point,
        base_seed=base_seed,
    )

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(analysis.chart_json(result))
    csv_out = out_path.with_suffix(".csv")
    csv_out.write_text(analysis.chart_csv(result))

    if output_format == "json":
        click.echo(analysis.chart_json(result))
    elif output_format == "csv":
        click.echo(analysis.chart_csv(result), nl=False)
    else:
        click.echo("epsilon   mae           expected_mae")
        for eps, mae, expected in zip(result.grid, result.mae_curve, result.expected_curve):
            click.echo(f"{eps:<9g} {mae:<13.6g} {expected:.6g}")
        pearson = "n/a" if result.pearson_r is None else f"{result.pearson_r:.4f}"
        spearman = "n/a" if result.spearman_rho is None else f"{result.spearman_rho:.4f}"
        click.echo(f"pearson:  {pearson}")
        click.echo(f"spearman: {spearman}")
        click.echo(f"outputs:  {out_path} {csv_out}")


@cli.command(epilog=_PROFILE_HELP)
@click.argument("csv_path", type=click.Path(path_type=Path))
@click.option("--lower", type=float, default=DEFAULT_BOUNDS.lower, show_default=True)
@click.option("--upper", type=float, default=DEFAULT_BOUNDS.upper, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              default=Path("profiles.json"), show_default=True)
@click.option("--fill-missing", is_flag=True, default=False)
@format_option
def profiles(
    csv_path: Path,
    lower: float,
    upper: float,
    seed: int,
    out_path: Path,
    fill_missing: bool,
    output_format: str,
) -> None:
    """Compare the three canonical preference profiles on one dataset."""
    bounds = ClampBounds(lower=lower, upper=upper)
    results = {}
    for index, (name, profile) in enumerate(CANONICAL_PROFILES.items()):
        policy = CANONICAL_POLICY if profile.compliance_required else None
        selection, _noisy, utility, impact = _run_pipeline(
            csv_path, bounds, profile, policy, seed + index, fill_missing,
            explain.PROVIDER_TEMPLATE,
        )
        results[name] = {
            "selected_epsilon": selection.epsilon_star,
            "mae": utility.mae,
            "privacy_score": impact.privacy_score,
            "seed": seed + index,
        }

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps({"profiles": results}, indent=2))

    names = list(results)
    if output_format == "json":
        click.echo(json.dumps({"profiles": results}, indent=2))
    elif output_format == "csv":
        click.echo("metric," + ",".join(names))
        for metric in ("selected_epsilon", "mae", "privacy_score"):
            click.echo(metric + "," + ",".join(str(results[n][metric]) for n in names))
    else:
        width = max(len(n) for n in names) + 2
        click.echo(f"{'metric':<18}" + "".join(f"{n:<{width}}" for n in names))
        for metric, fmt in (
            ("selected_epsilon", "g"),
            ("mae", ".6g"),
            ("privacy_score", ".1f"),
        ):
            row = "".join(f"{results[n][metric]:<{width}{fmt}}" for n in names)
            click.echo(f"{metric:<18}" + row)
        click.echo(f"output: {out_path}")


def main(argv: Optional[list[str]] = None) -> int:
    """Entry point with the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except CivicDpError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error [io_error]: {exc}", err=True)
        return 2
    except ValueError as exc:
        click.echo(f"error [validation_error]: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
