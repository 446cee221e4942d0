import json
import math
from pathlib import Path

from flask import current_app, jsonify, request

from ..accounts import load_emissions, load_household_accounts, load_sector_accounts
from ..config import Config
from ..errors import InputError, MissingFileError, NumericalError, ScenarioError, TaxFrameError
from ..extensions import limiter
from ..fiscal import ZERO_IMPACT_MESSAGE, TaxScenario, prepare_model, run_scenario
from ..forms import parse_population_weights, validate_scenario_payload
from ..inequality import (
    MISSING_WEIGHTS_MESSAGE,
    RegionScope,
    gini_delta,
    regressivity,
    scope_distributions,
)
from ..report import emit_diagnostics, scope_table
from . import bp

MODEL_CACHE_KEY = "taxframe.model"


def _number(value):
    value = float(value)
    return value if math.isfinite(value) else None


def _data_dir() -> Path:
    return Path(current_app.config["DATA_DIR"]).resolve()


def _model():
    cached = current_app.extensions.get(MODEL_CACHE_KEY)
    data_dir = _data_dir()
    if cached is not None and cached[0] == data_dir:
        return cached[1]
    accounts = load_sector_accounts(data_dir / current_app.config["SECTORS_FILE"])
    households = load_household_accounts(
        data_dir / current_app.config["HOUSEHOLDS_FILE"], accounts.sector_ids
    )
    model = prepare_model(accounts, households)
    current_app.extensions[MODEL_CACHE_KEY] = (data_dir, model)
    current_app.logger.info("Loaded scenario model from %s", data_dir)
    return model


def _notices(result, distributions) -> list[str]:
    # Mirrors the TaxFrameWarnings raised by run_scenario and scope_distributions.
    notices = []
    if result.total_decline == 0:
        notices.append(ZERO_IMPACT_MESSAGE)
    regions = {group.region for group in result.groups}
    if len(regions) > 1 and RegionScope.ALL not in distributions:
        notices.append(MISSING_WEIGHTS_MESSAGE)
    return notices


def _resolve_emissions(name: str) -> Path:
    data_dir = _data_dir()
    candidate = (data_dir / name).resolve()
    if Path(name).is_absolute() or data_dir not in candidate.parents:
        raise ScenarioError("emissions_file must name a file inside the data directory")
    return candidate


@bp.errorhandler(TaxFrameError)
def handle_taxframe_error(exc):
    if isinstance(exc, MissingFileError):
        status = 404
    elif isinstance(exc, NumericalError):
        status = 422
    else:
        status = 400
    if not isinstance(exc, InputError):
        current_app.logger.warning("Scenario request failed: %s", exc)
    return jsonify({"error": str(exc), "kind": type(exc).__name__}), status


@bp.route("/health", methods=["GET"])
def health():
    return jsonify({"status": "ok", "version": current_app.config["APP_VERSION"]})


@bp.route("/scenarios/run", methods=["POST"])
@limiter.limit(lambda: current_app.config.get("SCENARIO_RATE_LIMIT", Config.SCENARIO_RATE_LIMIT))
def run_scenario_view():
    payload = request.get_json(silent=True)
    if payload is None:
        return jsonify({"error": "expected a JSON body"}), 400
    cleaned = validate_scenario_payload(payload, source="request")
    open_model = request.args.get("open_model", "").lower() in {"1", "true", "yes"}

    model = _model()
    accounts = model.accounts
    scenario = TaxScenario(
        emissions=load_emissions(_resolve_emissions(cleaned["emissions_file"]), accounts.sector_ids),
        rate=cleaned["rate"],
        pass_through=cleaned["pass_through"],
        label=cleaned["label"],
    )
    weights = parse_population_weights(current_app.config.get("POPULATION_WEIGHTS"))

    result = run_scenario(accounts, model.households, scenario, open_model=open_model, model=model)
    distributions = scope_distributions(result, weights)

    inequality = {}
    for scope, (before, after) in distributions.items():
        change = gini_delta(before, after)
        inequality[scope.value] = {
            "gini_before": change.g_before,
            "gini_after": change.g_after,
            "delta": change.delta,
        }
    burdens = {}
    for scope in RegionScope:
        pct_dy = scope_table(result, scope)["pct_dy"].to_numpy()
        if pct_dy.size >= 2 and all(math.isfinite(v) for v in pct_dy):
            burdens[scope] = regressivity(pct_dy)

    groups = [
        {
            "group_id": group.group_id,
            "region": group.region.value,
            "decile": group.decile,
            "y1": _number(result.y1[i]),
            "dy": _number(result.dy[i]),
            "y2": _number(result.y2[i]),
            "pct_dy": _number(result.pct_dy[i]),
            "pct_cy": _number(result.pct_cy[i]),
        }
        for i, group in enumerate(result.groups)
    ]
    current_app.logger.info(
        "Scenario %r served: total decline %.6g", scenario.label, result.total_decline
    )
    return jsonify(
        {
            "label": result.label,
            "groups": groups,
            "inequality": inequality,
            "diagnostics": json.loads(emit_diagnostics(model, result, burdens)),
            "warnings": _notices(result, distributions),
        }
    )
