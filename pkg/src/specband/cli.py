"""
specband - band selection and multi-source fusion for hyperspectral classification

Command-line entry point. Exit codes: 0 success, 1 internal error, 2 usage, 3 I/O, 4 numerical failure.
"""

import functools
import sys
from typing import Any, Callable, Dict, Optional

import click
import structlog
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import load_settings
from .dataio.models import SynthSpec
from .errors import EXIT_INTERNAL, EXIT_IO, EXIT_NUMERICAL, EXIT_USAGE, ConfigurationError, SpecbandError
from .training.trainer import DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE, TrainConfig
from .utils.log_setup import configure_logging
from .utils.validation import (
    parse_index_list,
    validate_band_ratio,
    validate_patch_size,
    validate_positive,
)

logger = structlog.get_logger(__name__)
console = Console()


def exits_on_error(command: Callable) -> Callable:
    """Map library errors to the stable exit codes with a one-line message on stderr."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SpecbandError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            click.echo(f"error: {location}: {first['msg']}", err=True)
            sys.exit(EXIT_USAGE)
        except OSError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_IO)
        except ArithmeticError as e:
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except click.ClickException:
            raise
        except Exception as e:
            logger.exception("Command failed", command=command.__name__)
            click.echo(f"error: internal error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_INTERNAL)

    return wrapper


def _checked(validator: Callable[[Any], Any]) -> Callable:
    """click callback running one of the validation helpers."""

    def callback(ctx, param, value):
        if value is None:
            return value
        try:
            return validator(value)
        except ConfigurationError as e:
            raise click.BadParameter(str(e), ctx=ctx, param=param) from None

    return callback


def _threads(ctx: click.Context) -> int:
    return ctx.obj["settings"].threads


def input_options(command: Callable) -> Callable:
    command = click.option("--labels", required=True, help="Label raster stem (i32le)")(command)
    command = click.option("--aux", required=True, help="Auxiliary cube stem")(command)
    command = click.option("--hsi", required=True, help="Hyperspectral cube stem")(command)
    return command


def training_options(command: Callable) -> Callable:
    """Data, model and optimization flags shared by train and ablate."""
    options = [
        click.option("--patch-size", default=11, show_default=True, type=int,
                     callback=_checked(validate_patch_size), help="Odd patch size p"),
        click.option("--band-ratio", default=0.2, show_default=True, type=float,
                     callback=_checked(validate_band_ratio), help="Retained band ratio K in (0, 1]"),
        click.option("--blocks", default=4, show_default=True, type=int,
                     callback=_checked(lambda v: validate_positive("--blocks", v)), help="Number of RSCBs"),
        click.option("--reduced-bands", default=None, type=int,
                     callback=_checked(lambda v: validate_positive("--reduced-bands", v)),
                     help="PCA components r (default: aux channel count)"),
        click.option("--epochs", default=DEFAULT_EPOCHS, show_default=True, type=int,
                     callback=_checked(lambda v: validate_positive("--epochs", v))),
        click.option("--lr", default=DEFAULT_LEARNING_RATE, show_default=True, type=float,
                     callback=_checked(lambda v: validate_positive("--lr", v)), help="Learning rate (> 0)"),
        click.option("--batch-size", default=DEFAULT_BATCH_SIZE, show_default=True, type=int,
                     callback=_checked(lambda v: validate_positive("--batch-size", v))),
        click.option("--optimizer", default="adam", show_default=True, type=click.Choice(["adam", "sgd"])),
        click.option("--per-class-train", default=20, show_default=True, type=int,
                     callback=_checked(lambda v: validate_positive("--per-class-train", v, strict=False)),
                     help="Training patches drawn per class"),
        click.option("--seed", default=0, show_default=True, type=int),
        click.option("--band-selector", default="kbsm", show_default=True, type=click.Choice(["kbsm", "random"])),
        click.option("--fusion", default="cafm", show_default=True, type=click.Choice(["cafm", "cross_attention"])),
        click.option("--sources", default="both", show_default=True, type=click.Choice(["both", "hsi", "aux"])),
        click.option("--no-pca", is_flag=True, help="Feed the full HSI to the reduced stream"),
        click.option("--share-block-params", is_flag=True),
        click.option("--freeze-selection", is_flag=True, help="Reuse block 1's selection in later blocks"),
        click.option("--no-score-coupling", is_flag=True),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _split_training_flags(flags: Dict[str, Any]):
    from .commands import DataOptions

    data = DataOptions(
        patch_size=flags["patch_size"],
        per_class_train=flags["per_class_train"],
        split_seed=flags["seed"],
        reduced_bands=flags["reduced_bands"],
        use_pca=not flags["no_pca"],
    )
    train_config = TrainConfig(
        epochs=flags["epochs"],
        batch_size=flags["batch_size"],
        learning_rate=flags["lr"],
        optimizer=flags["optimizer"],
        seed=flags["seed"],
    )
    model = {
        "band_ratio": flags["band_ratio"],
        "num_blocks": flags["blocks"],
        "seed": flags["seed"],
        "band_selector": flags["band_selector"],
        "fusion": flags["fusion"],
        "sources": flags["sources"],
        "share_block_params": flags["share_block_params"],
        "freeze_selection": flags["freeze_selection"],
        "score_coupling": not flags["no_score_coupling"],
    }
    return data, train_config, model


def _report_table(title: str, rows: Dict[str, Any]) -> Table:
    table = Table(title=title)
    table.add_column("metric")
    table.add_column("value", justify="right")
    for key, value in rows.items():
        table.add_row(key, f"{value:.4f}" if isinstance(value, float) else str(value))
    return table


@click.group()
@click.option("--threads", default=None, type=int, help="Worker cap (overrides SPECBAND_THREADS)")
@click.option("--log-level", default=None, help="Log level (overrides SPECBAND_LOG_LEVEL)")
@click.option("--log-json", is_flag=True, default=False, help="JSON log lines on stderr")
@click.pass_context
def cli(ctx, threads, log_level, log_json):
    """specband - key band selection and cross-source fusion for HSI classification"""
    if threads is not None and threads < 1:
        raise click.BadParameter(f"--threads must be >= 1, got {threads}", param_hint="--threads")
    settings = load_settings(threads=threads)
    if log_level:
        settings = settings.model_copy(update={"log_level": log_level.upper()})
    if log_json:
        settings = settings.model_copy(update={"log_json": True})
    configure_logging(settings.log_level, settings.log_json)
    ctx.ensure_object(dict)
    ctx.obj["settings"] = settings


@cli.command()
@click.option("--height", default=32, show_default=True, type=int)
@click.option("--width", default=32, show_default=True, type=int)
@click.option("--bands", default=30, show_default=True, type=int)
@click.option("--aux-bands", default=4, show_default=True, type=int)
@click.option("--classes", default=3, show_default=True, type=int)
@click.option("--planted", default=None, help="Planted band indices, e.g. 2,7,19")
@click.option("--gap", default=0.5, show_default=True, type=float, help="Class signature gap")
@click.option("--noise", default=0.1, show_default=True, type=float, help="HSI noise sigma")
@click.option("--rho", default=0.9, show_default=True, type=float, help="Redundancy of non-planted bands")
@click.option("--aux-gap", default=1.0, show_default=True, type=float)
@click.option("--aux-noise", default=0.1, show_default=True, type=float)
@click.option("--aux-shared-classes", default=0, show_default=True, type=int)
@click.option("--shadow-fraction", default=0.0, show_default=True, type=float)
@click.option("--labeled-fraction", default=1.0, show_default=True, type=float)
@click.option("--regions-per-class", default=3, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, help="Output directory")
@exits_on_error
def synth(out, planted, gap, noise, rho, aux_noise, **flags):
    """Write a synthetic scene with planted informative bands"""
    from .commands import run_synth

    values = dict(flags)
    if planted is not None:
        values["planted_bands"] = parse_index_list(planted)
    spec = SynthSpec(
        class_signature_gap=gap,
        noise_sigma=noise,
        redundancy_rho=rho,
        aux_noise_sigma=aux_noise,
        **values,
    )
    truth = run_synth(spec, out)
    click.echo(f"planted bands: {','.join(str(b) for b in truth['planted'])}")


@cli.command()
@input_options
@training_options
@click.option("--out", required=True, help="Output directory")
@exits_on_error
def train(hsi, aux, labels, out, **flags):
    """Train RSCNet and write checkpoint, loss curve and manifest"""
    from .commands import run_train

    data, train_config, model = _split_training_flags(flags)
    summary = run_train(hsi, aux, labels, out, data, train_config, model)
    console.print(_report_table("training", summary.model_dump()))


@cli.command(name="eval")
@click.option("--checkpoint", required=True, help="Checkpoint stem written by train")
@input_options
@click.option("--split", default="test", show_default=True, type=click.Choice(["train", "test", "all"]))
@click.option("--export-embeddings", is_flag=True, help="Also write embeddings.csv")
@click.option("--out", required=True, help="Output directory")
@click.pass_context
@exits_on_error
def evaluate(ctx, checkpoint, hsi, aux, labels, split, export_embeddings, out):
    """Evaluate a checkpoint: report, classification map and palette"""
    from .commands import run_eval

    report = run_eval(
        checkpoint, hsi, aux, labels, out,
        split=split, threads=_threads(ctx), export_embeddings=export_embeddings,
    )
    console.print(_report_table(
        f"evaluation ({split})",
        {"OA": report.oa, "AA": report.aa, "Kappa": report.kappa, "samples": report.samples},
    ))
    if report.missing_class_warning:
        click.echo(f"warning: classes absent from the {split} set: {report.missing_classes}", err=True)


@cli.command(name="select-bands")
@click.option("--checkpoint", required=True, help="Checkpoint stem written by train")
@input_options
@click.option("--split", default="train", show_default=True, type=click.Choice(["train", "test", "all"]))
@click.option("--band-ratio", default=None, type=float, callback=_checked(validate_band_ratio),
              help="Override the trained band ratio K")
@click.option("--block", default=0, show_default=True, type=int, help="Which RSCB's scores to aggregate")
@click.option("--out", required=True, help="Output directory")
@click.pass_context
@exits_on_error
def select_bands(ctx, checkpoint, hsi, aux, labels, split, band_ratio, block, out):
    """Dataset-level band selection from averaged KBSM scores"""
    from .commands import run_select_bands

    chosen = run_select_bands(
        checkpoint, hsi, aux, labels, out,
        split=split, band_ratio=band_ratio, block=block, threads=_threads(ctx),
    )
    click.echo(f"selected bands (k={chosen.selection.k}): {','.join(map(str, chosen.selection.indices))}")


@cli.command()
@input_options
@click.option("--acc", "acc", is_flag=True, help="Average correlation coefficient")
@click.option("--mi", "mi", is_flag=True, help="Mutual information with the labels")
@click.option("--bands", "band_list", default=None, help="Selected band indices, e.g. 2,7,19")
@click.option("--selection", default=None, help="selection.json written by select-bands")
@click.option("--out", required=True, help="Output directory")
@exits_on_error
def analyze(hsi, aux, labels, acc, mi, band_list, selection, out):
    """Redundancy (ACC) and label dependency (MI) of all vs selected bands"""
    from .commands import read_selection, run_analyze

    selected: Optional[list] = None
    if band_list and selection:
        raise ConfigurationError("pass either --bands or --selection, not both")
    if band_list:
        selected = parse_index_list(band_list)
    elif selection:
        selected = read_selection(selection)

    reports = run_analyze(hsi, aux, labels, out, selected=selected, acc=acc, mi=mi)
    table = Table(title="redundancy")
    table.add_column("bands")
    table.add_column("ACC", justify="right")
    table.add_column("MI", justify="right")
    for name, report in reports.items():
        table.add_row(
            name,
            "-" if report.acc is None else f"{report.acc:.4f}",
            "-" if report.mi is None else f"{report.mi:.4f}",
        )
    console.print(table)


@cli.command()
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--samples-per-leaf", default=8, show_default=True, type=int,
              callback=_checked(lambda v: validate_positive("--samples-per-leaf", v)),
              help="Parameter elements checked per network leaf")
@click.option("--out", default=None, help="Optional output directory for gradcheck.json")
@exits_on_error
def gradcheck(seed, samples_per_leaf, out):
    """Finite-difference check of every op and a toy network"""
    from .commands import run_gradcheck

    result = run_gradcheck(seed=seed, samples_per_leaf=samples_per_leaf, out=out)
    click.echo(f"max relative error: {result.max_rel_error:.3e}")
    if not result.passed:
        worst = max(result.errors, key=result.errors.get)
        click.echo(f"error: gradient check failed (worst: {worst})", err=True)
        sys.exit(EXIT_NUMERICAL)


@cli.command()
@input_options
@training_options
@click.option("--variant", "variants", multiple=True, help="Variant name (repeatable; default all)")
@click.option("--out", required=True, help="Output directory")
@click.pass_context
@exits_on_error
def ablate(ctx, hsi, aux, labels, variants, out, **flags):
    """Train and evaluate the component ablations under one seed and split"""
    from .commands import run_ablate

    data, train_config, model = _split_training_flags(flags)
    report = run_ablate(
        hsi, aux, labels, out, data, train_config, model,
        variants=list(variants) or None, threads=_threads(ctx),
    )
    table = Table(title="ablation")
    for column in ("variant", "OA", "AA", "Kappa", "params"):
        table.add_column(column, justify="left" if column == "variant" else "right")
    for row in report.rows:
        table.add_row(row.name, f"{row.oa:.4f}", f"{row.aa:.4f}", f"{row.kappa:.4f}", str(row.params))
    console.print(table)


@cli.command()
def version():
    """Show version information"""
    click.echo(f"specband v{__version__}")


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()
