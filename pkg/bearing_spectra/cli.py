"""
Command-line interface: ``generate``, ``ingest``, ``train``, ``classify``,
``experiment``, ``report`` and ``sweep``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from bearing_spectra import __version__
from bearing_spectra.classifier import classify, extract_features, train_model
from bearing_spectra.config import dump_config, load_config, with_overrides
from bearing_spectra.constants import (
    DEFAULT_CONTRIBUTION,
    DEFAULT_D,
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    FFT_POINTS,
    IMAGE_COLS,
    IMAGE_MANIFEST_COLUMNS,
    IMAGE_ROWS,
    LOG_LEVEL,
    PROFILES,
    RAW_MANIFEST_COLUMNS,
)
from bearing_spectra.enums import FaultType, FeatureKind, LoadCondition, RawFormat, ReportFormat
from bearing_spectra.exceptions import DataError, UserInputValidationError
from bearing_spectra.experiment import (
    FAULT_TYPES,
    ExperimentConfig,
    SuiteConfig,
    expand_suite,
    render_windows,
    run_suite,
    sweep,
    synthetic_recording,
)
from bearing_spectra.model_io import (
    load_model,
    manifest_label,
    manifest_load,
    read_manifest,
    save_model,
    write_manifest,
)
from bearing_spectra.report import emit_report, format_confusion, format_table, read_report, timing_comparison
from bearing_spectra.spectrum_image import read_pgm, write_pgm
from bearing_spectra.structs import FaultClass, SpectrumImage
from bearing_spectra.utils import DEFAULT_ENCODING, parse_list
from bearing_spectra.vibration import ingest_raw, segment, write_raw

LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class UsageError(Exception):
    """
    Raised by the argument parser instead of exiting.
    """


class ArgumentParser(argparse.ArgumentParser):
    """
    Argument parser that reports usage errors as exceptions so that ``main``
    can map them to exit code 1.
    """

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class Sample(NamedTuple):
    name: str
    image: SpectrumImage
    spectrum: Optional[np.ndarray]
    label: FaultClass


def _configure_logging(verbosity: int):
    level = {0: LOG_LEVEL.upper(), 1: "INFO"}.get(verbosity, "DEBUG")
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def _is_raw_manifest(path: Path) -> bool:
    with open(path, "r", encoding=DEFAULT_ENCODING) as f:
        header = parse_list(f.readline())
    return "format" in header


def _load_samples(manifest: Path, rows: int, cols: int) -> List[Sample]:
    """
    Samples listed by an image manifest (PGM files) or a raw manifest
    (recordings cut into 1024-sample windows).
    """
    if not manifest.is_file():
        raise DataError(f"Manifest not found: {manifest}")
    samples: List[Sample] = []
    if not _is_raw_manifest(manifest):
        for _, row in read_manifest(manifest, IMAGE_MANIFEST_COLUMNS).iterrows():
            label = manifest_label(row)
            samples.append(Sample(row["path"], read_pgm(row["path"]), None, label))
        return samples
    for _, row in read_manifest(manifest, RAW_MANIFEST_COLUMNS).iterrows():
        label, load = manifest_label(row), manifest_load(row)
        signal = ingest_raw(row["path"], RawFormat(str(row["format"])), float(row["sample_rate"]), label, load)
        windows = segment(signal, FFT_POINTS, FFT_POINTS)
        images, spectra = render_windows(windows, rows, cols)
        for index, (image, spectrum) in enumerate(zip(images, spectra)):
            samples.append(Sample(f"{row['path']}#{index}", SpectrumImage(image, label), spectrum, label))
    return samples


def _generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = ExperimentConfig(
        seed=args.seed,
        fault_size=args.fault_size,
        classes=tuple(FaultType(name.upper()) for name in parse_list(args.classes)),
        images_per_class=args.images_per_class,
        n_per_class=1,
        image_rows=args.rows,
        image_cols=args.cols,
    )
    loads = [LoadCondition(int(index)) for index in parse_list(args.loads)]
    image_rows, raw_rows = [], []
    for fault_type in config.classes:
        label = config.fault_class(fault_type)
        size = "" if label.fault_size is None else label.fault_size
        for load in loads:
            recording = synthetic_recording(config, fault_type, load)
            stem = f"{label}_{str(load).lower()}"
            if args.raw_format:
                fmt = RawFormat(args.raw_format)
                raw_name = f"{stem}.{'csv' if fmt is RawFormat.CSV else 'bin'}"
                write_raw(recording, out / raw_name, fmt)
                raw_rows.append(
                    {
                        "path": raw_name,
                        "format": fmt.value,
                        "sample_rate": recording.sample_rate,
                        "fault_type": fault_type.value,
                        "fault_size": size,
                        "load": load.index,
                    }
                )
            windows = segment(recording, FFT_POINTS, FFT_POINTS)[: config.images_per_class]
            images, _ = render_windows(windows, config.image_rows, config.image_cols)
            for index, pixels in enumerate(images):
                name = f"{stem}_{index:04d}.pgm"
                write_pgm(SpectrumImage(pixels, label), out / name)
                image_rows.append(
                    {"path": name, "fault_type": fault_type.value, "fault_size": size, "load": load.index}
                )
    write_manifest(image_rows, out / "images.csv", IMAGE_MANIFEST_COLUMNS)
    if raw_rows:
        write_manifest(raw_rows, out / "raw.csv", RAW_MANIFEST_COLUMNS)
    LOGGER.info("Generated %d images in %s", len(image_rows), out)
    print(f"{len(image_rows)} images written to {out / 'images.csv'}")
    return EXIT_OK


def _ingest(args) -> int:
    label = FaultClass.parse(args.fault_type, args.fault_size)
    load = LoadCondition(args.load)
    fmt = RawFormat(args.format)
    rows = []
    for name in args.files:
        signal = ingest_raw(name, fmt, args.sample_rate, label, load)
        rows.append(
            {
                "path": str(Path(name).resolve()),
                "format": fmt.value,
                "sample_rate": args.sample_rate,
                "fault_type": label.fault_type.value,
                "fault_size": "" if label.fault_size is None else label.fault_size,
                "load": load.index,
            }
        )
        LOGGER.info("%s: %d samples, %d windows", name, len(signal), len(signal) // FFT_POINTS)
    manifest = Path(args.manifest)
    if manifest.is_file():
        existing = pd.read_csv(manifest, dtype=str, keep_default_na=False)
        missing = [column for column in RAW_MANIFEST_COLUMNS if column not in existing.columns]
        if missing:
            raise DataError(f"Manifest {manifest} lacks columns {missing}")
        rows = existing[RAW_MANIFEST_COLUMNS].to_dict("records") + rows
    write_manifest(rows, manifest, RAW_MANIFEST_COLUMNS)
    print(f"{len(args.files)} recordings added to {manifest}")
    return EXIT_OK


def _train(args) -> int:
    kind = FeatureKind(args.kind)
    manifest = Path(args.manifest)
    samples = _load_samples(manifest, args.rows, args.cols)
    if kind is FeatureKind.FFT_AMPLITUDE and any(sample.spectrum is None for sample in samples):
        raise UserInputValidationError("FFT-amplitude models need a raw manifest")
    model = train_model(
        kind,
        [sample.label for sample in samples],
        images=[sample.image for sample in samples],
        spectra=[sample.spectrum for sample in samples] if kind is FeatureKind.FFT_AMPLITUDE else None,
        d=args.d,
        contribution=args.contribution,
    )
    save_model(model, args.out)
    print(f"{kind.value} model trained on {len(model)} samples written to {args.out}")
    return EXIT_OK


def _classify(args) -> int:
    model = load_model(args.model)
    target = Path(args.input)
    if target.suffix.lower() == ".pgm":
        if model.kind is FeatureKind.FFT_AMPLITUDE:
            raise UserInputValidationError("FFT-amplitude models classify raw manifests, not images")
        result = classify(extract_features(model.kind, model.basis, image=read_pgm(target)), model)
        print(f"{target}\t{result.label}\t{result.distance:.6f}")
        return EXIT_OK
    rows, cols = model.basis.mean_image.shape if model.kind is FeatureKind.EIGEN_IMAGE else (args.rows, args.cols)
    samples = _load_samples(target, rows, cols)
    correct = 0
    for sample in samples:
        feature = extract_features(model.kind, model.basis, image=sample.image, spectrum=sample.spectrum)
        result = classify(feature, model)
        correct += result.label == sample.label
        print(f"{sample.name}\t{sample.label}\t{result.label}\t{result.distance:.6f}")
    if samples:
        print(f"accuracy {100.0 * correct / len(samples):.2f}% ({correct}/{len(samples)})")
    return EXIT_OK


def _suite_from_args(args):
    suite = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.repetitions is not None:
        changes["repetitions"] = args.repetitions
    if args.profile is not None:
        changes["images_per_class"] = PROFILES[args.profile]
    return with_overrides(suite, **changes) if changes else suite


def _write_outputs(report, args):
    emit_report(report, args.out, ReportFormat.CSV)
    if args.text:
        emit_report(report, args.text, ReportFormat.TEXT)
    if getattr(args, "confusion", False):
        for entry in report.entries:
            print(format_confusion(entry))


def _experiment(args) -> int:
    suite = _suite_from_args(args)
    if args.config_out:
        Path(args.config_out).write_text(dump_config(suite), encoding=DEFAULT_ENCODING)
    report = run_suite(suite)
    _write_outputs(report, args)
    print(f"{len(report)} report entries written to {args.out}")
    return EXIT_OK


def _report(args) -> int:
    report = read_report(args.input)
    if args.timing:
        table = timing_comparison(report)
        if args.out:
            table.to_csv(args.out, index=False, float_format="%.2f")
        else:
            print(table.to_string(index=False, float_format=lambda value: f"{value:.2f}"))
        return EXIT_OK
    fmt = ReportFormat(args.format)
    if args.out:
        emit_report(report, args.out, fmt)
    elif fmt is ReportFormat.TEXT:
        print(format_table(report))
    else:
        print(report.to_frame().to_csv(index=False, float_format="%.2f", lineterminator="\n"), end="")
    return EXIT_OK


def _sweep(args) -> int:
    suite = _suite_from_args(args)
    base = suite.base
    kind = FeatureKind(args.kind) if args.kind else (suite.feature_kinds or (base.feature_kind,))[0]
    n = args.n if args.n is not None else base.n_per_class
    configs = expand_suite(SuiteConfig(base, (args.test,), (n,), (kind,)))
    values = [float(value) for value in parse_list(args.values)] if args.values else None
    report = sweep(configs[0], args.parameter, values)
    _write_outputs(report, args)
    print(f"{len(report)} sweep entries written to {args.out}")
    return EXIT_OK


def _add_suite_options(parser):
    parser.add_argument("--config", required=True, help="Experiment config file (key = value).")
    parser.add_argument("--out", required=True, help="Report CSV path.")
    parser.add_argument("--text", help="Also write the aligned-text table here.")
    parser.add_argument("--seed", type=int, help="Override the master seed.")
    parser.add_argument("--repetitions", type=int, help="Override the repetition count.")
    parser.add_argument("--profile", choices=sorted(PROFILES), help="Override the corpus size profile.")
    parser.add_argument("--confusion", action="store_true", help="Print the confusion matrix of every entry.")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="bearing-spectra", description="Spectrum-image bearing fault diagnosis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging.")
    verbs = parser.add_subparsers(dest="verb", required=True, parser_class=ArgumentParser)

    generate = verbs.add_parser("generate", help="Synthesize a corpus of PGM spectrum images.")
    generate.add_argument("--out", required=True, help="Output directory.")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--fault-size", type=float, default=0.014)
    generate.add_argument("--images-per-class", type=int, default=PROFILES["desk"])
    generate.add_argument("--classes", default=",".join(fault_type.value for fault_type in FAULT_TYPES))
    generate.add_argument("--loads", default="0,1,2,3")
    generate.add_argument("--rows", type=int, default=IMAGE_ROWS)
    generate.add_argument("--cols", type=int, default=IMAGE_COLS)
    generate.add_argument(
        "--raw-format", choices=[fmt.value for fmt in RawFormat], help="Also write the raw recordings."
    )
    generate.set_defaults(handler=_generate)

    ingest = verbs.add_parser("ingest", help="Validate raw recordings and list them in a manifest.")
    ingest.add_argument("files", nargs="+")
    ingest.add_argument("--manifest", required=True, help="Raw manifest to create or extend.")
    ingest.add_argument("--format", required=True, choices=[fmt.value for fmt in RawFormat])
    ingest.add_argument("--sample-rate", type=float, required=True)
    ingest.add_argument("--fault-type", required=True, choices=[fault_type.value for fault_type in FaultType])
    ingest.add_argument("--fault-size", type=float)
    ingest.add_argument("--load", type=int, required=True, choices=[load.index for load in LoadCondition])
    ingest.set_defaults(handler=_ingest)

    train = verbs.add_parser("train", help="Fit a model on an image or raw manifest.")
    train.add_argument("--manifest", required=True)
    train.add_argument("--out", required=True, help="Model file (.npz).")
    train.add_argument("--kind", default=FeatureKind.EIGEN_IMAGE.value, choices=[kind.value for kind in FeatureKind])
    train.add_argument("--d", type=int, default=DEFAULT_D)
    train.add_argument("--contribution", type=float, default=DEFAULT_CONTRIBUTION)
    train.add_argument("--rows", type=int, default=IMAGE_ROWS)
    train.add_argument("--cols", type=int, default=IMAGE_COLS)
    train.set_defaults(handler=_train)

    classify_parser = verbs.add_parser("classify", help="Classify a PGM image or a manifest.")
    classify_parser.add_argument("input", help="A .pgm image or a manifest CSV.")
    classify_parser.add_argument("--model", required=True)
    classify_parser.add_argument("--rows", type=int, default=IMAGE_ROWS)
    classify_parser.add_argument("--cols", type=int, default=IMAGE_COLS)
    classify_parser.set_defaults(handler=_classify)

    experiment = verbs.add_parser("experiment", help="Run the test suite of a config file.")
    _add_suite_options(experiment)
    experiment.add_argument("--config-out", help="Write the effective config here.")
    experiment.set_defaults(handler=_experiment)

    report = verbs.add_parser("report", help="Re-emit a report CSV.")
    report.add_argument("input")
    report.add_argument("--format", default=ReportFormat.TEXT.value, choices=[fmt.value for fmt in ReportFormat])
    report.add_argument("--out")
    report.add_argument("--timing", action="store_true", help="Compare PCA and 2DPCA times instead.")
    report.set_defaults(handler=_report)

    sweep_parser = verbs.add_parser("sweep", help="Rerun one test over values of d, contribution or n_per_class.")
    _add_suite_options(sweep_parser)
    sweep_parser.add_argument("--parameter", required=True, choices=["d", "contribution", "n_per_class"])
    sweep_parser.add_argument(
        "--values", help="Comma-separated values; contribution defaults to 0.2, 0.4, 0.6, 0.8, 0.9, 1.0."
    )
    sweep_parser.add_argument("--test", type=int, default=1)
    sweep_parser.add_argument("--n", type=int)
    sweep_parser.add_argument("--kind", choices=[kind.value for kind in FeatureKind])
    sweep_parser.set_defaults(handler=_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as error:
        print(f"error: {error}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except UserInputValidationError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
