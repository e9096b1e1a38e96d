"""Command-line interface: ``atvis {mask,simulate,recon,eval,export}``.

Exit codes: 0 success (or converged), 1 runtime failure (I/O, mismatched
inputs), 2 usage error, 3 reconstruction stopped at ``--max-iter`` without
converging, 4 non-finite iterate.

Any long option may also come from a ``key = value`` file given with
``--config``; options on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from . import io
from .forward import (
    BlurKernel,
    add_noise,
    blur_apply,
    density,
    fourier_undersample,
    make_gaussian_kernel,
    make_motion_kernel,
    synth_coils,
)
from .masks import VD_POWER, phase_encode_mask, radial_mask, variable_density_mask
from .metrics import rlne, sos_combine
from .phantoms import geometric_phantom, shepp_logan
from .recon import NumericalError, ReconConfig, run_atvis, run_restore, run_tvis

logger = logging.getLogger("atvis")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3
EXIT_NUMERICAL = 4

PHI_ALIASES = {"id": "identity", "identity": "identity", "log1p": "log1p", "one_minus_exp": "one_minus_exp", "exp": "one_minus_exp"}


class UsageError(Exception):
    pass


def _size(text: str):
    parts = text.lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {text!r}; expected N or NxM") from None
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2 or min(dims) < 2:
        raise argparse.ArgumentTypeError(f"bad size {text!r}; expected N or NxM with N, M >= 2")
    return tuple(dims)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _kernel_args(p):
    p.add_argument("--kernel", choices=["gaussian", "motion"], help="blur kernel family")
    p.add_argument("--radius", type=int, default=4, help="Gaussian kernel radius (taps 2r+1)")
    p.add_argument("--sigma-b", type=float, default=2.0, help="Gaussian kernel width")
    p.add_argument("--length", type=int, default=9, help="motion blur length in pixels")
    p.add_argument("--angle", type=float, default=30.0, help="motion blur angle in degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atvis", description="Adaptive-threshold TV iterative shrinkage")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value file supplying default options")
        return p

    p = add("mask", "generate a k-space sampling mask")
    p.add_argument("--type", choices=["vd", "radial", "phase"], help="mask family")
    p.add_argument("--size", type=_size, default=(256, 256), help="N or NxM (default 256x256)")
    p.add_argument("--frac", type=float, default=0.30, help="vd: acquired fraction")
    p.add_argument("--central-frac", type=float, default=0.0155, help="vd: fully sampled core fraction")
    p.add_argument("--spokes", type=int, default=80, help="radial: number of spokes")
    p.add_argument("--spacing", choices=["golden", "uniform"], default="golden", help="radial: angle spacing")
    p.add_argument("--lines", type=int, default=120, help="phase: total phase-encode rows")
    p.add_argument("--central-lines", type=int, default=32, help="phase: contiguous central rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="mask.csm")

    p = add("simulate", "simulate measurements from a phantom or image")
    p.add_argument("--mode", choices=["cs", "deblur"], default="cs")
    p.add_argument("--phantom", choices=["shepp", "geometric"], default="shepp")
    p.add_argument("--input", help="ground-truth CSM1 image instead of a phantom")
    p.add_argument("--size", type=int, default=256, help="phantom size N (N x N)")
    p.add_argument("--phantom-seed", type=int, default=0, help="geometric phantom seed")
    p.add_argument("--mask", help="cs: sampling mask file")
    p.add_argument("--coils", type=int, default=0, help="cs: number of synthetic coils (0 = single channel)")
    _kernel_args(p)
    p.add_argument("--noise", type=float, default=0.0, help="noise standard deviation")
    p.add_argument("--seed", type=int, default=0, help="noise (and coil) seed")
    p.add_argument("--out", default="meas.csm")
    p.add_argument("--ref-out", default="gt.csm", help="where to write the ground truth")

    p = add("recon", "reconstruct an image with TVIS or ATVIS")
    p.add_argument("measurements", nargs="?", help="k-space or blurred-image CSM1 file")
    p.add_argument("--mask", help="sampling mask (CS problems)")
    _kernel_args(p)
    p.add_argument("--algo", choices=["tvis", "atvis"], default="atvis")
    p.add_argument("--bc", choices=["pbc", "sbc"], default="pbc")
    p.add_argument("--shrink", choices=["componentwise", "vector"], default="componentwise")
    p.add_argument("--tv", choices=["anisotropic", "isotropic"], default="anisotropic")
    p.add_argument("--phi", choices=sorted(PHI_ALIASES), default="id")
    p.add_argument("--phi-scale", type=float, help="discrepancy scale c (default: automatic)")
    p.add_argument("--beta", type=float, help="fixed initial/constant threshold")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--damping", type=float, default=1.0)
    p.add_argument("--fista", type=_bool, default=True, help="use FISTA over-relaxation (default true)")
    p.add_argument("--threads", type=int, help="channel worker threads (default: ATVIS_THREADS or auto)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ref", help="ground truth for the RLNE trace column")
    p.add_argument("--out", default="recon.csm")
    p.add_argument("--trace", default="trace.csv")

    p = add("eval", "print the RLNE of an image against a reference")
    p.add_argument("image")
    p.add_argument("ref")

    p = add("export", "write an 8-bit PGM of image moduli")
    p.add_argument("image")
    p.add_argument("--out", default="image.pgm")
    p.add_argument("--ref", help="reference image for --diff")
    p.add_argument("--diff", action="store_true", help="export |image - ref| instead")
    return parser


def read_config(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as f:
        for n, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = line.split("=", 1)
            values[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return values


def _apply_config(parser, argv):
    """Re-parse ``argv`` with defaults taken from the ``--config`` file."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    values = read_config(args.config)
    for key, val in values.items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            try:
                values[key] = _bool(val)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(str(exc)) from None
    # string defaults go through each option's type conversion
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def _kernel_from(args, meta) -> BlurKernel | None:
    kind = args.kernel or meta.get("kernel")
    if kind is None:
        return None
    if args.kernel is None:
        # take the simulation parameters stored with the measurements
        if kind == "gaussian":
            return make_gaussian_kernel(int(meta["radius"]), float(meta["sigma_b"]))
        return make_motion_kernel(int(meta["length"]), float(meta["angle"]))
    if kind == "gaussian":
        return make_gaussian_kernel(args.radius, args.sigma_b)
    return make_motion_kernel(args.length, args.angle)


def cmd_mask(args) -> int:
    if args.type is None:
        raise UsageError("mask: --type is required")
    n, m = args.size
    try:
        if args.type == "vd":
            mask = variable_density_mask(n, m, args.frac, args.central_frac, args.seed)
            meta = {"type": "vd", "frac": args.frac, "central_frac": args.central_frac, "core": "square", "vd_power": VD_POWER, "seed": args.seed}
        elif args.type == "radial":
            mask = radial_mask(n, m, args.spokes, args.spacing)
            meta = {"type": "radial", "spokes": args.spokes, "spacing": args.spacing}
        else:
            mask = phase_encode_mask(n, m, args.lines, args.central_lines, args.seed)
            meta = {"type": "phase", "lines": args.lines, "central_lines": args.central_lines, "seed": args.seed}
    except ValueError as exc:
        raise UsageError(f"mask: {exc}") from None
    meta = {"size": f"{n}x{m}", **meta, "density": f"{density(mask):.6f}"}
    io.write_matrix(args.out, mask, meta)
    print(f"density {density(mask):.6f} ({int(mask.sum())} of {mask.size} samples)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.input:
        truth, _ = io.read_matrix(args.input)
        truth = np.asarray(truth, dtype=np.complex128)
    elif args.phantom == "shepp":
        truth = shepp_logan(args.size)
    else:
        truth = geometric_phantom(args.size, seed=args.phantom_seed)
    if truth.ndim != 2:
        raise ValueError(f"ground truth must be 2-D, got shape {truth.shape}")
    n, m = truth.shape
    meta = {"mode": args.mode, "noise": args.noise, "seed": args.seed}

    if args.mode == "cs":
        if not args.mask:
            raise UsageError("simulate --mode cs needs --mask")
        mask, _ = io.read_matrix(args.mask)
        if mask.shape != truth.shape:
            raise ValueError(f"mask shape {mask.shape} does not match image {truth.shape}")
        full = np.ones_like(mask, dtype=bool)
        if args.coils > 0:
            coils = synth_coils(args.coils, n, m, seed=args.seed)
            channels = coils * truth
            k = fourier_undersample(channels, full)
            ref = sos_combine(channels)
            meta["coils"] = args.coils
        else:
            k = fourier_undersample(truth, full)
            ref = truth
        # complex Gaussian noise per k-space sample, then undersample
        meas = add_noise(k, args.noise, args.seed) * mask
    else:
        kind = args.kernel or "gaussian"
        if kind == "gaussian":
            kernel = make_gaussian_kernel(args.radius, args.sigma_b)
            meta.update(kernel="gaussian", radius=args.radius, sigma_b=args.sigma_b)
        else:
            kernel = make_motion_kernel(args.length, args.angle)
            meta.update(kernel="motion", length=args.length, angle=args.angle)
        # blur and noise act on the real image
        base = truth.real if not np.iscomplexobj(truth) or not truth.imag.any() else truth
        meas = add_noise(blur_apply(base, kernel), args.noise, args.seed)
        ref = base
    io.write_matrix(args.out, meas, meta)
    io.write_matrix(args.ref_out, ref, {"role": "ground_truth"})
    return EXIT_OK


def _recon_params(args, problem) -> dict:
    keys = ["algo", "bc", "shrink", "tv", "phi", "phi_scale", "beta", "tol", "max_iter", "damping", "fista", "threads", "seed"]
    params = {"problem": problem, "measurements": args.measurements}
    params.update({k: getattr(args, k) for k in keys})
    if args.mask:
        params["mask"] = args.mask
    if args.ref:
        params["ref"] = args.ref
    return params


def cmd_recon(args) -> int:
    if not args.measurements:
        raise UsageError("recon: a measurement file is required")
    data, meta = io.read_matrix(args.measurements)
    kernel = _kernel_from(args, meta)
    ref = io.read_matrix(args.ref)[0] if args.ref else None
    cfg = ReconConfig(
        algo=args.algo,
        bc=args.bc,
        shrink_mode=args.shrink,
        tv_mode=args.tv,
        phi_kind=PHI_ALIASES[args.phi],
        phi_scale=args.phi_scale,
        tol=args.tol,
        max_iter=args.max_iter,
        damping=args.damping,
        seed=args.seed,
        fixed_beta=args.beta,
        fista=args.fista,
        threads=args.threads,
    )
    if kernel is not None:
        problem = "restore"
        report = run_restore(data, kernel, cfg, ref)
    else:
        if not args.mask:
            raise UsageError("recon: CS measurements need --mask")
        mask, _ = io.read_matrix(args.mask)
        problem = "cs_multi" if data.ndim == 3 else "cs_single"
        runner = run_atvis if args.algo == "atvis" else run_tvis
        report = runner(data, mask, replace(cfg, problem=problem), ref)

    params = _recon_params(args, problem)
    params["phi_scale_effective"] = report.phi_scale
    params["beta_initial"] = report.beta_initial
    params["sigma_hat"] = report.sigma_hat
    io.write_matrix(
        args.out,
        report.image,
        {"algo": args.algo, "iterations": report.iterations, "converged": report.converged,
         "beta_initial": report.beta_initial, "beta_final": report.beta_final},
    )
    io.write_trace(args.trace, report.trace, params, with_rlne=ref is not None)
    status = "converged" if report.converged else "not converged"
    print(f"{args.algo}: {status} after {report.iterations} iterations, beta {report.beta_initial:.6g} -> {report.beta_final:.6g}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_eval(args) -> int:
    u, _ = io.read_matrix(args.image)
    ref, _ = io.read_matrix(args.ref)
    print(f"{rlne(u, ref):.6f}")
    return EXIT_OK


def cmd_export(args) -> int:
    u, _ = io.read_matrix(args.image)
    ref = None
    if args.diff:
        if not args.ref:
            raise UsageError("export --diff needs --ref")
        ref, _ = io.read_matrix(args.ref)
        if ref.shape != u.shape:
            raise ValueError(f"shape mismatch {u.shape} vs {ref.shape}")
    io.write_pgm(args.out, io.to_gray8(u, ref))
    return EXIT_OK


COMMANDS = {"mask": cmd_mask, "simulate": cmd_simulate, "recon": cmd_recon, "eval": cmd_eval, "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError) as exc:
        print(f"atvis: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"atvis {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"atvis {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError, KeyError, io.FormatError) as exc:
        print(f"atvis {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
