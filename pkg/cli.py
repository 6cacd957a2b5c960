"""
catmorph command line

    catmorph info image.catd
    catmorph validate image.catd
    catmorph convert mask.png image.catd --palette "#ffffff;#1f77b4;#9467bd"
    catmorph open image.catd opened.catd --category 2 --radius 1 --norm city-block
    catmorph dilate image.catd out.catd --category 2 --protect 0,1 --mode capacity
    catmorph render image.catd view.png --style entropy
    catmorph recipe denoise > denoise.txt
    catmorph pipeline denoise.txt image.catd --output-dir out/

Exit codes: 0 ok, 1 usage error, 2 data or invariant error.
"""

import json
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np
import pandas as pd

from catd import describe_catd, read_catd, write_catd
from categorical import CategoricalImage, DirichletImage, validate
from constants import (
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    GEODESIC_BACKENDS,
    MORPH_BACKENDS,
    NORMS,
    OPS,
    PROTECTION_MODES,
    RENDER_STYLES,
)
from errors import CatMorphError, ImageValidationError, PipelineError
from imaging import default_palette, import_png_labels, parse_palette, render, save_png
from pipeline import RECIPES, PipelineSpec, PipelineStep, recipe, render_image, run_pipeline
from synthetic import SYNTHETIC_FIXTURES, make_fixture
from utils.config import get_config
from utils.logger import get_logger, set_level

logger = get_logger(__name__)

IMAGE_SUFFIXES = (".png", ".bmp", ".tif", ".tiff")


class CatMorphGroup(click.Group):
    """Group that maps toolkit errors to the documented exit codes"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except PipelineError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE if e.usage else EXIT_DATA)
        except CatMorphError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_DATA)
        except ValueError as e:
            # bad argument values that reach library code
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


# =============================================================================
# Helpers
# =============================================================================

def _palette(text: Optional[str], channels: int):
    return parse_palette(text) if text else default_palette(channels)


def load_image(path: Path, palette: Optional[str] = None, validate_payload: bool = True):
    """CATD file, or a colour-coded segmentation mask read through the palette"""
    if path.suffix.lower() in IMAGE_SUFFIXES:
        return import_png_labels(path, _palette(palette, 3))
    image = read_catd(path, validate=validate_payload)
    if isinstance(image, np.ndarray):
        raise ImageValidationError(f"{path} holds a scalar payload, not a categorical or Dirichlet image")
    return image


def save_image(image, path: Path, palette: Optional[str] = None) -> None:
    """Raster suffixes get the default render, anything else is written as CATD"""
    if path.suffix.lower() in IMAGE_SUFFIXES:
        if palette and isinstance(image, (CategoricalImage, DirichletImage)):
            save_png(render(image, "argmax", parse_palette(palette)), path, rank=len(image.shape))
        else:
            save_png(render_image(image), path, rank=len(image.shape))
    else:
        write_catd(image, path)
    click.echo(f"Wrote {path}")


def _int_list(text: Optional[str]):
    if not text:
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from None


def _channel_summary(image) -> pd.DataFrame:
    data = image.data.reshape(-1, image.channels)
    frame = pd.DataFrame(data, columns=[f"c{k}" for k in range(image.channels)])
    return frame.describe().T[["mean", "std", "min", "max"]]


# =============================================================================
# Command group
# =============================================================================

@click.group(cls=CatMorphGroup)
@click.option("--log-level", default=None, help="Override LOG_LEVEL (DEBUG, INFO, WARNING, ...)")
def cli(log_level: Optional[str]):
    """
    Mathematical morphology on images of categorical distributions.
    Check the help of each sub-command for details.
    """
    try:
        config = get_config()
    except ValueError as e:
        raise click.UsageError(f"invalid configuration: {e}")
    problems = config.validate()
    if problems:
        raise click.UsageError("invalid configuration: " + "; ".join(problems))
    if log_level:
        set_level(log_level)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Print the header as JSON")
def info(path: Path, as_json: bool):
    """Header and per-channel summary of a CATD file."""
    header = describe_catd(path)
    if as_json:
        click.echo(json.dumps(header, default=list))
        return
    for key, value in header.items():
        click.echo(f"{key}: {value}")
    image = read_catd(path, validate=False)
    if not isinstance(image, np.ndarray):
        click.echo(_channel_summary(image).to_string(float_format=lambda v: f"{v:.4f}"))


@cli.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--tol", type=click.FloatRange(min=0), default=None, help="Simplex tolerance (SIMPLEX_TOL by default)")
@click.pass_context
def validate_cmd(ctx: click.Context, path: Path, tol: Optional[float]):
    """Check that every pixel of a categorical image lies on the simplex."""
    image = read_catd(path, validate=False)
    if not isinstance(image, CategoricalImage):
        click.echo(f"{path}: {type(image).__name__} payload, nothing to validate")
        return
    report = validate(image, tol if tol is not None else get_config().SIMPLEX_TOL)
    if report.ok:
        click.echo(f"{path}: valid ({image.shape}, {image.channels} categories)")
        return
    click.echo(f"{path}: {report.describe()}", err=True)
    ctx.exit(EXIT_DATA)


@cli.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("target", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--palette", default=None, help='Category colours in order, e.g. "#ff0000;#00ff00;#0000ff"')
@click.option("--dirichlet", "concentration", type=float, default=None,
              help="Write Dirichlet parameters 1 + CONCENTRATION * p instead of the categorical image")
def convert(source: Path, target: Path, palette: Optional[str], concentration: Optional[float]):
    """Convert between segmentation masks, CATD files and PNG renders."""
    image = load_image(source, palette)
    if concentration is not None:
        if not isinstance(image, CategoricalImage):
            raise click.UsageError("--dirichlet needs a categorical input")
        image = DirichletImage(1.0 + concentration * image.data)
    save_image(image, target, palette)


def _morphology_command(op: str):
    @click.argument("source", type=click.Path(exists=True, dir_okay=False, path_type=Path))
    @click.argument("target", type=click.Path(dir_okay=False, path_type=Path))
    @click.option("--backend", type=click.Choice(MORPH_BACKENDS), default="categorical", show_default=True)
    @click.option("--category", "-i", type=int, default=None, help="Operated category")
    @click.option("--subset", default=None, help="Channels for dirichlet-subset, e.g. 0,2")
    @click.option("--radius", "-r", type=float, default=1.0, show_default=True)
    @click.option("--norm", type=click.Choice(NORMS), default=None, help="Ball norm (DEFAULT_NORM by default)")
    @click.option("--protect", default=None, help="Protected categories, e.g. 0,1")
    @click.option("--mode", type=click.Choice(PROTECTION_MODES), default="literal", show_default=True)
    @click.option("--ranking", default=None, help="N-ary erosion tie ranking, e.g. 1,0")
    @click.option("--geodesic", type=click.Choice(GEODESIC_BACKENDS), default="auto", show_default=True)
    @click.option("--palette", default=None, help="Palette for PNG input or output")
    def command(source, target, backend, category, subset, radius, norm, protect, mode, ranking, geodesic, palette):
        step = PipelineStep(
            op,
            backend=backend,
            category=category,
            subset=_int_list(subset),
            radius=radius,
            norm=norm or get_config().DEFAULT_NORM,
            protect=_int_list(protect),
            mode=mode,
            ranking=_int_list(ranking),
            geodesic=geodesic,
        )
        try:
            step.check()
        except ValueError as e:
            raise click.UsageError(str(e)) from e
        result = run_pipeline(PipelineSpec([step]), load_image(source, palette))
        click.echo(f"{step.canonical()}  ({result.log['seconds'].iloc[0]:.2f}s, "
                   f"drift {result.log['max_drift'].iloc[0]:.2e})")
        save_image(result.image, target, palette)

    command.__doc__ = f"{op.capitalize()} one category (or Dirichlet channels) of an image."
    return cli.command(op)(command)


for _op in OPS:
    _morphology_command(_op)


@cli.command("render")
@click.argument("source", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("target", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--style", type=click.Choice(RENDER_STYLES), default="rgb-mixture", show_default=True)
@click.option("--palette", default=None, help="Category colours for rgb-mixture / argmax")
def render_cmd(source: Path, target: Path, style: str, palette: Optional[str]):
    """Write an 8-bit view of an image."""
    image = load_image(source)
    view = render(image, style, parse_palette(palette) if palette else None)
    save_png(view, target, rank=len(image.shape))
    click.echo(f"Wrote {target}")


@cli.command("pipeline")
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("source", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--output-dir", "-o", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Where taps and the step log go (OUTPUT_DIR by default)")
@click.option("--render/--no-render", "render_taps", default=None, help="PNG render next to each tap")
@click.option("--palette", default=None, help="Palette for PNG input")
@click.option("--canonical", is_flag=True, help="Print the canonical pipeline and exit")
def pipeline_cmd(spec_file: Path, source: Path, output_dir: Optional[Path], render_taps: Optional[bool],
                 palette: Optional[str], canonical: bool):
    """Run a pipeline file on an image."""
    spec = PipelineSpec.from_file(spec_file)
    if canonical:
        click.echo(spec.canonical(), nl=False)
        return
    output_dir = output_dir or Path(get_config().OUTPUT_DIR)
    result = run_pipeline(spec, load_image(source, palette), output_dir, render_taps)
    write_catd(result.image, output_dir / "final.catd")
    click.echo(result.log.to_string(index=False))
    click.echo(f"Wrote {len(result.taps)} taps and final.catd to {output_dir}")


@cli.command("recipe")
@click.argument("name", type=click.Choice(sorted(RECIPES)))
@click.option("--radius", "-r", type=float, default=None, help="Replace every step's radius")
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None)
def recipe_cmd(name: str, radius: Optional[float], output: Optional[Path]):
    """Print (or write) a built-in recipe in canonical form."""
    text = recipe(name, radius).canonical()
    if output is None:
        click.echo(text, nl=False)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text)
    click.echo(f"Wrote {output}")


@cli.command("synth")
@click.argument("name", type=click.Choice(sorted(SYNTHETIC_FIXTURES)))
@click.argument("target", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--seed", type=int, default=0, show_default=True)
def synth(name: str, target: Path, seed: int):
    """Write a synthetic fixture image."""
    save_image(make_fixture(name, seed), target)


def main(args=None):
    """Console entry point"""
    cli.main(args=args, prog_name="catmorph")


if __name__ == "__main__":
    main()
