"""Command line entry point.

    gossipsim <staleness|train|bounds> [--config FILE] [flags...]

Config files are flat key=value text with [section] headers (see README);
any key can also be given as a flag, and flags win.
"""

import argparse
import configparser
import sys

from gossipsim.errors import ConfigError
from gossipsim.learning import HyperParams
from gossipsim.runner import SCALINGS, ExperimentConfig, execute

# (section, key) -> ExperimentConfig attribute
CONFIG_KEYS = {
    ("run", "scheme"): ("scheme", str),
    ("run", "n"): ("ns", "int_list"),
    ("run", "scaling"): ("scaling", str),
    ("run", "lambda0"): ("lambda0", float),
    ("run", "mu"): ("mu", float),
    ("run", "c"): ("c", float),
    ("run", "d"): ("d_delay", float),
    ("run", "horizon"): ("horizon", float),
    ("run", "burn_in"): ("burn_in", float),
    ("run", "seeds"): ("seeds", "int_list"),
    ("run", "out"): ("out_dir", str),
    ("run", "epochs"): ("epochs", int),
    ("run", "predictor"): ("predictor", str),
    ("dataset", "dim"): ("dim", int),
    ("dataset", "m"): ("m", "m"),
    ("dataset", "samples_per_user"): ("samples_per_user", int),
    ("dataset", "label_noise_sd"): ("label_noise_sd", float),
    ("dataset", "normalize"): ("normalize", "bool"),
    ("dataset", "dump"): ("dump_dataset", "bool"),
    ("hyper", "alpha"): ("alpha", float),
    ("hyper", "tau"): ("tau", int),
    ("hyper", "batch"): ("batch", int),
    ("hyper", "decay"): ("decay", "bool"),
}

_BOOL = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


def _convert(raw: str, conv):
    if conv == "int_list":
        return [int(v) for v in raw.replace(",", " ").split()]
    if conv == "bool":
        try:
            return _BOOL[raw.strip().lower()]
        except KeyError:
            raise ConfigError(f"expected a boolean, got {raw!r}") from None
    if conv == "m":
        raw = raw.strip()
        return raw if raw == "n" else int(raw)
    return conv(raw)


def load_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for section in parser.sections():
        for key, raw in parser[section].items():
            try:
                attr, conv = CONFIG_KEYS[(section, key)]
            except KeyError:
                raise ConfigError(f"unknown config key [{section}] {key}") from None
            values[attr] = _convert(raw, conv)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gossipsim",
        description="Asynchronous decentralized learning / gossip staleness simulator",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("staleness", "train", "bounds"):
        p = sub.add_parser(mode)
        p.add_argument("--config", help="key=value config file with [section] headers")
        p.add_argument("--n", type=int, nargs="+", dest="ns", help="node counts")
        p.add_argument("--scaling", choices=SCALINGS)
        p.add_argument("--scheme", choices=("uniform", "opportunistic"))
        p.add_argument("--seeds", type=int, nargs="+")
        p.add_argument("--out", dest="out_dir", help="output directory")
        p.add_argument("--lambda0", type=float, help="base gossip rate")
        p.add_argument("--mu", type=float, help="update rate")
        p.add_argument("--c", type=float, help="gradient computation delay")
        p.add_argument("--d", type=float, dest="d_delay", help="gossip deterministic delay")
        p.add_argument("--horizon", type=float, help="simulated seconds")
        p.add_argument("--burn-in", type=float, dest="burn_in")
        p.add_argument("--epochs", type=int)
        p.add_argument("--predictor", choices=("linear", "bilinear"))
        p.add_argument("--dim", type=int, help="feature dimension")
        p.add_argument("--m", help="distribution count, or the literal 'n'")
        p.add_argument("--samples-per-user", type=int, dest="samples_per_user")
        p.add_argument("--label-noise-sd", type=float, dest="label_noise_sd")
        p.add_argument("--normalize", action="store_true", default=None)
        p.add_argument("--dump-dataset", action="store_true", default=None,
                       dest="dump_dataset")
        p.add_argument("--alpha", type=float, help="learning rate")
        p.add_argument("--tau", type=int, help="SGD steps per update event")
        p.add_argument("--batch", type=int, help="mini-batch size")
        p.add_argument("--decay", action="store_true", default=None,
                       help="use alpha/sqrt(step) schedule")
    return parser


HYPER_ATTRS = ("alpha", "tau", "batch", "decay")


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = {"mode": args.mode}
    if args.config:
        values.update(load_config_file(args.config))
    for attr in vars(args):
        if attr in ("mode", "config"):
            continue
        flag = getattr(args, attr)
        if flag is not None:
            values[attr] = flag if attr != "m" else _convert(str(flag), "m")
    hyper_kwargs = {k: values.pop(k) for k in HYPER_ATTRS if k in values}
    if hyper_kwargs:
        values["hyper"] = HyperParams(**hyper_kwargs)
    return ExperimentConfig(**values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        path = execute(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
