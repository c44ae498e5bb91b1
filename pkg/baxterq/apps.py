from django.apps import AppConfig
from django.conf import settings
from django.core.checks import Error, Tags, Warning, register


class BaxterQAppConfig(AppConfig):
    name = "baxterq"
    label = "baxterq"
    verbose_name = "Baxter Q-operators"

    @register(Tags.compatibility)
    def check_tolerances(app_configs, **kwargs):
        errors = []
        for name, value in getattr(settings, "BAXTERQ_TOLERANCES", {}).items():
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                errors.append(
                    Error(
                        f"Tolerance {name!r} must be a positive number, got {value!r}.",
                        hint="Fix the entry in BAXTERQ_TOLERANCES",
                        id="baxterq.E001",
                        obj=BaxterQAppConfig,
                    )
                )
        return errors

    @register(Tags.compatibility)
    def check_quadrature(app_configs, **kwargs):
        from baxterq.sklyanin import MIN_GRID

        grid = getattr(settings, "BAXTERQ_QUADRATURE", {}).get("GRID")
        if grid is None:
            return []
        try:
            too_small = len(grid) != 2 or min(int(n) for n in grid) < MIN_GRID
        except (TypeError, ValueError):
            too_small = True
        if too_small:
            return [
                Error(
                    f"BAXTERQ_QUADRATURE['GRID'] must be two sizes of at least {MIN_GRID}, got {grid!r}.",
                    hint=f"Use a grid such as ({MIN_GRID * 2}, {MIN_GRID * 2})",
                    id="baxterq.E002",
                    obj=BaxterQAppConfig,
                )
            ]
        return []

    @register(Tags.compatibility)
    def check_suite_names(app_configs, **kwargs):
        from baxterq.suites import DEFAULT_SUITES

        warnings = []
        for name in getattr(settings, "BAXTERQ_SUITES", {}):
            if name not in DEFAULT_SUITES:
                warnings.append(
                    Warning(
                        f"BAXTERQ_SUITES entry {name!r} is not a qop subcommand and will only be reachable by name.",
                        hint=f"Use one of {', '.join(DEFAULT_SUITES)}",
                        id="baxterq.W001",
                        obj=BaxterQAppConfig,
                    )
                )
        return warnings
