"""Command-line front end: SNR sweeps, figure presets and a self-test.

Output is CSV with the fixed header
``snr_db,evaluator,ser,ci99_low,ci99_high,trials,converged``.
Confidence-interval and trial columns are empty for the analytical
evaluators; ``converged`` is only populated (0/1) for the series evaluator.

Exit codes: 0 success, 2 usage error, 3 numeric/convergence failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import kappa_mu, montecarlo, ser_engine
from .kappa_mu import KappaMuParams
from .montecarlo import SimConfig, run_model_faithful, run_physical
from .ser_engine import LinkParams, NetworkParams, link_ser_quadrature, link_ser_series, modulation
from .specfun import DomainError, SeriesControl

__all__ = ["SweepSpec", "UsageError", "run_sweep", "figure_preset", "rows_to_csv", "main"]

CSV_HEADER = "snr_db,evaluator,ser,ci99_low,ci99_high,trials,converged"
EVALUATORS = ("series", "quadrature", "mc_model", "mc_physical")

# Declared reconstruction defaults for the figure presets: the source
# captions say "different values" without enumerating them.
DEFAULT_KAPPA_SET = (0.0, 1.0, 2.0, 4.0)
DEFAULT_MU_SET = (1.0, 2.0, 3.0)
DEFAULT_MU_PAIR_SET = ((1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (3.0, 1.0), (1.0, 3.0))
DEFAULT_KM_RD_SET = ((1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (3.0, 1.0), (1.0, 3.0))

# Distinct Monte Carlo stream block per sweep point.
_POINT_SEED_STRIDE = 1000003


class UsageError(ValueError):
    """Bad command line, config file, or preset name."""


@dataclass(frozen=True)
class SweepSpec:
    """One SER-vs-SNR curve.

    The per-point mean SNR (linear) is 10^(snr_db/10), applied to all three
    links, optionally shifted per link by ``snr_offset_db``.
    """

    snr_db_start: float
    snr_db_stop: float
    snr_db_step: float
    net: NetworkParams
    evaluators: tuple[str, ...] = ("quadrature",)
    trials: int = 100_000
    seed: int = 0
    partitions: int = 1
    antennas: tuple[int, int, int] = (1, 1, 1)
    snr_offset_db: tuple[float, float, float] = (0.0, 0.0, 0.0)
    series_ctl: SeriesControl = field(default_factory=SeriesControl)
    label: str = ""

    def __post_init__(self) -> None:
        if self.snr_db_start > self.snr_db_stop:
            raise UsageError("snr start must be <= stop")
        if not self.snr_db_step > 0.0:
            raise UsageError("snr step must be positive")
        if not self.evaluators:
            raise UsageError("at least one evaluator is required")
        for ev in self.evaluators:
            if ev not in EVALUATORS:
                raise UsageError(f"unknown evaluator {ev!r}")

    def snr_points(self) -> list[float]:
        pts = []
        v = self.snr_db_start
        i = 0
        while v <= self.snr_db_stop + 1e-9:
            pts.append(round(v, 10))
            i += 1
            v = self.snr_db_start + i * self.snr_db_step
        return pts


def _net_at_snr(spec: SweepSpec, snr_db: float) -> NetworkParams:
    def scale(link: LinkParams, off: float) -> LinkParams:
        f = link.fading
        gbar = 10.0 ** ((snr_db + off) / 10.0)
        return LinkParams(KappaMuParams(f.kappa, f.mu, gbar, f.antenna_product))

    osr, osd, ord_ = spec.snr_offset_db
    return NetworkParams(scale(spec.net.sr, osr), scale(spec.net.sd, osd),
                         scale(spec.net.rd, ord_), spec.net.modulation)


def _series_end_to_end(net: NetworkParams, ctl: SeriesControl) -> tuple[float, bool]:
    """End-to-end SER with every link on the series route; quadrature
    fallback per link when a series does not converge."""
    vals = []
    converged = True
    for link in (net.sr, net.sd, net.rd):
        res = link_ser_series(link, net.modulation, ctl)
        if res.converged:
            vals.append(res.value)
        else:
            converged = False
            vals.append(link_ser_quadrature(link, net.modulation))
    p_sr, p_sd, p_rd = vals
    ser = ser_engine.compose_end_to_end(p_sr, p_sd, p_sd * p_rd)
    return min(max(ser, 0.0), 1.0), converged


def _eval_point(spec: SweepSpec, snr_db: float, point_index: int,
                evaluator: str) -> dict:
    net = _net_at_snr(spec, snr_db)
    row = {"snr_db": snr_db, "evaluator": evaluator, "ser": None,
           "ci99_low": None, "ci99_high": None, "trials": None, "converged": None}
    if evaluator == "quadrature":
        row["ser"] = ser_engine.end_to_end_ser(net)
    elif evaluator == "series":
        ser, conv = _series_end_to_end(net, spec.series_ctl)
        row["ser"] = ser
        row["converged"] = 1 if conv else 0
    else:
        seed = spec.seed + _POINT_SEED_STRIDE * point_index
        if evaluator == "mc_model":
            cfg = SimConfig(net, "model_faithful", spec.trials, seed, spec.partitions)
            res = run_model_faithful(cfg)
        else:
            cfg = SimConfig(net, "physical", spec.trials, seed, spec.partitions,
                            antennas=spec.antennas)
            res = run_physical(cfg)
        row.update(ser=res.ser, ci99_low=res.ci99_low, ci99_high=res.ci99_high,
                   trials=res.trials)
    return row


def run_sweep(spec: SweepSpec) -> list[dict]:
    """Evaluate every requested evaluator at every SNR point.

    A failing evaluator yields a row with ser='error'; the sweep continues.
    """
    rows = []
    order = [ev for ev in EVALUATORS if ev in spec.evaluators]
    for i, snr_db in enumerate(spec.snr_points()):
        for ev in order:
            try:
                rows.append(_eval_point(spec, snr_db, i, ev))
            except Exception:
                rows.append({"snr_db": snr_db, "evaluator": ev, "ser": "error",
                             "ci99_low": None, "ci99_high": None,
                             "trials": None, "converged": None})
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in rows:
        def fmt(v, spec="%.12e"):
            if v is None:
                return ""
            if isinstance(v, str):
                return v
            if isinstance(v, int):
                return str(v)
            return spec % v

        out.write(",".join([
            "%.6f" % r["snr_db"],
            r["evaluator"],
            fmt(r["ser"]),
            fmt(r["ci99_low"]),
            fmt(r["ci99_high"]),
            fmt(r["trials"]),
            fmt(r["converged"]),
        ]) + "\n")
    return out.getvalue()


# --- figure presets --------------------------------------------------------

def _preset_net(mod, kappas, mus, aps=(1, 1, 1)) -> NetworkParams:
    links = [LinkParams(KappaMuParams(k, m, 1.0, ap))
             for k, m, ap in zip(kappas, mus, aps)]
    return NetworkParams(links[0], links[1], links[2], mod)


def figure_preset(name: str, snr_start: float = 0.0, snr_stop: float = 30.0,
                  snr_step: float = 5.0, trials: int = 100_000,
                  seed: int = 0) -> list[SweepSpec]:
    """Sweep bundles reproducing the published parameter studies.

    fig1: QPSK, mu=1, curves over kappa.     fig2: 4-QAM, mu=1, over kappa.
    fig3: QPSK, kappa=1, curves over mu.     fig4: 4-QAM, mu_sd=1, kappa=1,
    curves over (mu_sr, mu_rd).              fig5: 4-QAM, source links at
    kappa=mu=1, curves over (kappa_rd, mu_rd).
    The kappa/mu value sets are declared defaults, not published values.
    """
    base = dict(snr_db_start=snr_start, snr_db_stop=snr_stop, snr_db_step=snr_step,
                evaluators=("series", "quadrature"), trials=trials, seed=seed)
    qpsk = modulation("qpsk")
    qam4 = modulation("mqam", 4)
    if name == "fig1":
        return [SweepSpec(net=_preset_net(qpsk, (k, k, k), (1, 1, 1)),
                          label=f"kappa_{k:g}", **base) for k in DEFAULT_KAPPA_SET]
    if name == "fig2":
        return [SweepSpec(net=_preset_net(qam4, (k, k, k), (1, 1, 1)),
                          label=f"kappa_{k:g}", **base) for k in DEFAULT_KAPPA_SET]
    if name == "fig3":
        return [SweepSpec(net=_preset_net(qpsk, (1, 1, 1), (m, m, m)),
                          label=f"mu_{m:g}", **base) for m in DEFAULT_MU_SET]
    if name == "fig4":
        return [SweepSpec(net=_preset_net(qam4, (1, 1, 1), (msr, 1, mrd)),
                          label=f"musr_{msr:g}_murd_{mrd:g}", **base)
                for msr, mrd in DEFAULT_MU_PAIR_SET]
    if name == "fig5":
        return [SweepSpec(net=_preset_net(qam4, (1, 1, krd), (1, 1, mrd)),
                          label=f"kappard_{krd:g}_murd_{mrd:g}", **base)
                for krd, mrd in DEFAULT_KM_RD_SET]
    raise UsageError(f"unknown figure preset {name!r} (expected fig1..fig5)")


# --- argument handling ------------------------------------------------------

def _parse_antennas(text: str) -> tuple[int, int, int]:
    try:
        parts = [int(p) for p in text.lower().split("x")]
    except ValueError:
        parts = []
    if len(parts) != 3 or any(p < 1 for p in parts):
        raise UsageError(f"--antennas expects NSxNRxND, got {text!r}")
    return tuple(parts)


def _per_link(value, name) -> tuple[float, float, float]:
    if isinstance(value, (int, float)):
        return (float(value),) * 3
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return tuple(float(v) for v in value)
    raise UsageError(f"{name} must be a number or a [sr, sd, rd] triple")


def _build_spec(args) -> SweepSpec:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}")
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")

    def pick(flag, key, default):
        return flag if flag is not None else cfg.get(key, default)

    scheme = pick(args.modulation, "modulation", "qpsk")
    m_size = pick(args.M, "M", None)
    kappa = _per_link(pick(args.kappa, "kappa", 1.0), "kappa")
    mu = _per_link(pick(args.mu, "mu", 1.0), "mu")
    antennas = pick(args.antennas, "antennas", "1x1x1")
    if isinstance(antennas, str):
        antennas = _parse_antennas(antennas)
    evaluators = pick(args.evaluators, "evaluators", ["quadrature"])
    if isinstance(evaluators, str):
        evaluators = [e.strip() for e in evaluators.split(",") if e.strip()]
    ns, nr, nd = antennas
    aps = (ns * nr, ns * nd, nr * nd)
    try:
        mod = modulation(scheme, int(m_size) if m_size is not None else None)
        net = _preset_net(mod, kappa, mu, aps)
        return SweepSpec(
            snr_db_start=float(pick(args.snr_start, "snr_start", 0.0)),
            snr_db_stop=float(pick(args.snr_stop, "snr_stop", 30.0)),
            snr_db_step=float(pick(args.snr_step, "snr_step", 5.0)),
            net=net,
            evaluators=tuple(evaluators),
            trials=int(pick(args.trials, "trials", 100_000)),
            seed=int(pick(args.seed, "seed", 0)),
            partitions=int(pick(args.partitions, "partitions", 1)),
            antennas=antennas,
        )
    except DomainError as exc:
        raise UsageError(str(exc))


def _cmd_sweep(args) -> int:
    spec = _build_spec(args)
    rows = run_sweep(spec)
    csv_text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    if any(r["ser"] == "error" for r in rows):
        return 3
    return 0


def _cmd_figure(args) -> int:
    specs = figure_preset(args.name, trials=args.trials or 100_000,
                          seed=args.seed or 0)
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for spec in specs:
        rows = run_sweep(spec)
        (outdir / f"{args.name}_{spec.label}.csv").write_text(rows_to_csv(rows))
        if any(r["ser"] == "error" for r in rows):
            status = 3
    return status


def _cmd_selftest(_args) -> int:
    import scipy.integrate as si

    failures = 0

    def check(label, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
        if not ok:
            failures += 1

    p = KappaMuParams(2.0, 1.5, 3.0, 2)
    lap, _ = si.quad(lambda g: math.exp(-0.7 * g) * kappa_mu.pdf(p, g), 0.0,
                     float("inf"), limit=400)
    check("closed-form MGF matches numeric Laplace transform",
          abs(kappa_mu.mgf(p, 0.7) - lap) <= 1e-8 * lap)
    norm, _ = si.quad(lambda g: kappa_mu.pdf(p, g), 0.0, float("inf"), limit=400)
    check("density normalizes to 1", abs(norm - 1.0) <= 1e-8)

    link = LinkParams(KappaMuParams(1e-12, 1.0, 1.0, 1))
    anchor = 0.5 * (1.0 - math.sqrt(0.5))
    check("Rayleigh BPSK anchor",
          abs(link_ser_quadrature(link, modulation("bpsk")) - anchor) <= 1e-9)

    ok = True
    for k, mu, g in ((0.5, 1.0, 5.0), (2.0, 1.5, 8.0), (1.0, 2.0, 20.0)):
        l2 = LinkParams(KappaMuParams(k, mu, g, 1))
        q = link_ser_quadrature(l2, modulation("qpsk"))
        s = link_ser_series(l2, modulation("qpsk"))
        ok = ok and s.converged and abs(s.value - q) <= 1e-8 * q
    check("series route agrees with quadrature where converged", ok)

    spec = SweepSpec(0.0, 10.0, 5.0, _preset_net(modulation("qpsk"), (1, 1, 1), (1, 1, 1)),
                     evaluators=("series", "quadrature", "mc_model"), trials=20000, seed=3)
    check("sweep output is byte-stable",
          rows_to_csv(run_sweep(spec)) == rows_to_csv(run_sweep(spec)))

    return 0 if failures == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kmurelay",
                                 description="Analytical and Monte Carlo SER for a "
                                             "kappa-mu S-DF relay link")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="SER vs SNR sweep, CSV output")
    sw.add_argument("--snr-start", type=float, dest="snr_start")
    sw.add_argument("--snr-stop", type=float, dest="snr_stop")
    sw.add_argument("--snr-step", type=float, dest="snr_step")
    sw.add_argument("--modulation", type=str)
    sw.add_argument("--M", type=int, dest="M", help="constellation size for M-ary schemes")
    sw.add_argument("--kappa", type=float)
    sw.add_argument("--mu", type=float)
    sw.add_argument("--antennas", type=str, help="NSxNRxND, e.g. 2x2x1")
    sw.add_argument("--evaluators", type=str,
                    help="comma list from: series,quadrature,mc_model,mc_physical")
    sw.add_argument("--trials", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--partitions", type=int)
    sw.add_argument("--config", type=str, help="JSON file with SweepSpec fields")
    sw.add_argument("--out", type=str, help="CSV output path (default stdout)")
    sw.set_defaults(func=_cmd_sweep)

    fg = sub.add_parser("figure", help="write the CSVs of a figure preset")
    fg.add_argument("--name", required=True)
    fg.add_argument("--out", type=str, help="output directory")
    fg.add_argument("--trials", type=int)
    fg.add_argument("--seed", type=int)
    fg.set_defaults(func=_cmd_figure)

    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.set_defaults(func=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ser_engine.QuadratureError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
