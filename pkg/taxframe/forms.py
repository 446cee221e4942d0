import math

from wtforms import FloatField, Form, StringField
from wtforms.validators import DataRequired, Length, NumberRange, StopValidation

from .accounts import Region
from .config import Config
from .errors import ConfigError, ScenarioError

SCENARIO_KEYS = ("label", "rate_rp_per_kg", "pass_through", "emissions_file")


def finite_number(form, field):
    value = field.data
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise StopValidation(f"{field.name} must be a finite number")


def text(form, field):
    if field.data is not None and not isinstance(field.data, str):
        raise StopValidation(f"{field.name} must be a string")


class ScenarioForm(Form):
    label = StringField("Label", validators=[text, DataRequired(), Length(max=200)])
    rate_rp_per_kg = FloatField(
        "Tax rate (Rp/kg CO2e)",
        default=Config.DEFAULT_TAX_RATE,
        validators=[finite_number, NumberRange(min=0)],
    )
    pass_through = FloatField(
        "Pass-through",
        default=Config.DEFAULT_PASS_THROUGH,
        validators=[finite_number, NumberRange(min=0, max=1)],
    )
    emissions_file = StringField(
        "Emissions file", validators=[text, DataRequired(), Length(max=1024)]
    )


def validate_scenario_payload(payload, source: str = "scenario") -> dict:
    if not isinstance(payload, dict):
        raise ScenarioError(f"{source}: expected a JSON object")
    unknown = sorted(set(payload) - set(SCENARIO_KEYS))
    if unknown:
        raise ScenarioError(f"{source}: unknown keys {', '.join(unknown)}")
    form = ScenarioForm(data=payload)
    if not form.validate():
        problems = "; ".join(
            f"{name}: {' '.join(str(message) for message in messages)}"
            for name, messages in sorted(form.errors.items())
        )
        raise ScenarioError(f"{source}: {problems}")
    return {
        "label": form.label.data.strip(),
        "rate": float(form.rate_rp_per_kg.data),
        "pass_through": float(form.pass_through.data),
        "emissions_file": form.emissions_file.data.strip(),
    }


def parse_population_weights(value: str | None) -> dict[Region, float] | None:
    """Parse ``urban=0.56,rural=0.44``; an empty value means no weights."""
    if value is None or not value.strip():
        return None
    weights: dict[Region, float] = {}
    for part in value.split(","):
        name, sep, raw = part.partition("=")
        if not sep:
            raise ConfigError(f"population weight {part!r} is not region=fraction")
        try:
            region = Region.parse(name)
            weight = float(raw)
        except ValueError as exc:
            raise ConfigError(f"bad population weight {part!r}: {exc}") from exc
        if region in weights:
            raise ConfigError(f"population weight for {region.value} given twice")
        if not math.isfinite(weight) or weight < 0:
            raise ConfigError(f"population weight for {region.value} must be a nonnegative fraction")
        weights[region] = weight
    if set(weights) != set(Region):
        raise ConfigError("population weights must name both urban and rural")
    if abs(sum(weights.values()) - 1) > Config.WEIGHT_TOLERANCE:
        raise ConfigError(f"population weights sum to {sum(weights.values())!r}, not 1")
    return weights
