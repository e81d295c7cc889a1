"""
Command line front end.

  python cli.py sample   --scenario FILE --lambda X --seed S --out users.csv
  python cli.py curve    --scenario FILE --mode up-dir --cmin A --cmax B --points N --out curve.csv
  python cli.py mc       --scenario FILE --lambda X --samples N --c C --bfrac B --mode M --seed S --out report.csv
  python cli.py minimize --scenario FILE --c C --b B --kind {updir|b0|plfree-dodir|oracle} --out sol.csv
  python cli.py classify --scenario FILE --b b1,b2,b3,b4 --c c1,c2,c3,c4

Errors print 'Fehler [<code>]: <message>' to stderr and exit with status 2.
"""
import argparse
import logging
import sys

import numpy as np
from dotenv import load_dotenv

load_dotenv()

from core.classifier import classify_fixed, classify_random_base  # noqa: E402
from core.errors import FrustrationError  # noqa: E402
from core.experiments import frustration_curve, rare_event_mc  # noqa: E402
from core.minimizer import solve_kind  # noqa: E402
from core.sampler import sample_ppp  # noqa: E402
from core.sir import MODES  # noqa: E402
from models.network import GridResolution  # noqa: E402
from utils import csv_io  # noqa: E402
from utils.scenario_file import load_scenario  # noqa: E402
from utils.settings import get_settings  # noqa: E402

logger = logging.getLogger("cli")


def _vector(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"Keine Zahlenliste: {text}") from exc
    if len(values) != 4:
        raise argparse.ArgumentTypeError("Genau vier Werte erwartet (up, up-dir, do, do-dir).")
    return values


def _resolution(args) -> GridResolution:
    return GridResolution(n_space=args.n_space, n_angle=args.n_angle, n_fading=args.n_fading)


def _required(value, name: str):
    if value is None:
        raise FrustrationError(f"{name} fehlt (weder Option noch [experiment] im Szenario).", code="PARAMETER")
    return value


# --------------------------------------------------------------------------- #
# Subcommands                                                                  #
# --------------------------------------------------------------------------- #

def cmd_sample(args) -> None:
    sc = load_scenario(args.scenario)
    lam = _required(args.lam or sc.experiment.lam, "--lambda")
    seed = sc.experiment.seed if args.seed is None else args.seed
    sample = sample_ppp(sc.model, sc.kernel, lam, seed, args.stream)
    csv_io.write_sample(args.out, sample)
    print(f"{sample.n_users} Nutzer -> {args.out}")


def cmd_curve(args) -> None:
    sc = load_scenario(args.scenario)
    c_max = sc.model.qos.c_plus if args.cmax is None else args.cmax
    points = frustration_curve(
        sc.model, args.mode, np.linspace(args.cmin, c_max, args.points),
        _resolution(args), sc.kernel, args.base_fading,
    )
    csv_io.write_curve(args.out, points, {"scenario_hash": sc.hash, "mode": args.mode, "c_plus": sc.model.qos.c_plus})
    print(f"{len(points)} Punkte -> {args.out}")


def cmd_mc(args) -> None:
    sc = load_scenario(args.scenario)
    settings = get_settings()
    exp = sc.experiment
    report = rare_event_mc(
        sc.model,
        _required(args.lam or exp.lam, "--lambda"),
        args.samples,
        _required(exp.c if args.c is None else args.c, "--c"),
        _required(exp.b_fraction if args.bfrac is None else args.bfrac, "--bfrac"),
        mode=args.mode or exp.mode,
        seed=exp.seed if args.seed is None else args.seed,
        kernel=sc.kernel,
        absolute=args.absolute,
        block_size=args.block_size or settings.block_size,
        workers=args.workers or settings.workers,
        count_threshold=args.count_threshold,
    )
    csv_io.write_report(args.out, report)
    print(f"Treffer {report.hit_count}/{report.n_samples}, Haeufigkeit {report.frequency:.3g} "
          f"[{report.ci_low:.3g}, {report.ci_high:.3g}] -> {args.out}")


def cmd_minimize(args) -> None:
    sc = load_scenario(args.scenario)
    summary, table = solve_kind(sc.model, args.kind, args.c, args.b, args.base_fading, args.n_s, args.n_u, args.layout)
    csv_io.write_solution(args.out, summary, table, sc.hash)
    mult = ", ".join(f"{k}={v:.6g}" for k, v in summary.multipliers.items())
    print(f"{summary.kind}: {mult}, entropy={summary.entropy:.6g} -> {args.out}")


def cmd_classify(args) -> None:
    sc = load_scenario(args.scenario)
    if sc.model.base.kind == "random" and args.base_fading is None:
        verdict = classify_random_base(sc.model, args.b, args.c, _resolution(args), sc.kernel, args.n_u,
                                       get_settings().workers)
    else:
        verdict = classify_fixed(sc.model, args.b, args.c, _resolution(args), sc.kernel, args.base_fading)
    print(verdict.record_line())
    for interval in verdict.critical:
        print(f"critical={interval.kind} u=[{interval.low:.6g}, {interval.high:.6g}] mass={interval.mass:.6g}")


# --------------------------------------------------------------------------- #
# Parser                                                                       #
# --------------------------------------------------------------------------- #

def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-space", type=int, default=24, help="Ringe bzw. Zellen pro Achse")
    p.add_argument("--n-angle", type=int, default=24, help="Sektoren (Kreisfenster)")
    p.add_argument("--n-fading", type=int, default=10, help="Fading-Klassen")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frustration", description="Frustration in dichten Funknetzen")
    ap.add_argument("-v", "--verbose", action="store_true", help="DEBUG-Logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="Eine Realisierung des Poisson-Prozesses ziehen")
    p.add_argument("--scenario", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("curve", help="A-priori-Frustrationskurve p(c)")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mode", choices=MODES, default="up-dir")
    p.add_argument("--cmin", type=float, required=True)
    p.add_argument("--cmax", type=float, help="Standard: c+")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--base-fading", type=float)
    p.add_argument("--out", required=True)
    _add_grid(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("mc", help="Seltene-Ereignis-Monte-Carlo")
    p.add_argument("--scenario", required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--c", type=float)
    p.add_argument("--bfrac", type=float)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--absolute", action="store_true", help="G(L)(W) > b statt Anteil der Nutzer")
    p.add_argument("--count-threshold", type=int, help="Statistik fuer Stichproben mit N > Schwelle")
    p.add_argument("--workers", type=int)
    p.add_argument("--block-size", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("minimize", help="Entropie-Minimierer")
    p.add_argument("--scenario", required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--kind", choices=("updir", "b0", "plfree-dodir", "oracle"), default="updir")
    p.add_argument("--base-fading", type=float)
    p.add_argument("--n-s", type=int, default=40)
    p.add_argument("--n-u", type=int, default=20)
    p.add_argument("--layout", choices=("radial", "cartesian"), default="radial")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("classify", help="Exponentieller oder subexponentieller Abfall")
    p.add_argument("--scenario", required=True)
    p.add_argument("--b", type=_vector, required=True)
    p.add_argument("--c", type=_vector, required=True)
    p.add_argument("--base-fading", type=float)
    p.add_argument("--n-u", type=int, default=33, help="u-Gitter fuer zufaelliges F_o")
    _add_grid(p)
    p.set_defaults(func=cmd_classify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = "DEBUG" if args.verbose else get_settings().log_level
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except FrustrationError as exc:
        print(f"Fehler [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
