"""Command-line surface over the library.

Decision commands exit 0 for yes with a witness JSON on standard output,
exit 1 for no with a machine-readable reason, and 2 on errors.  All output
is deterministic for fixed inputs and seeds: JSON with fixed key order,
UTF-8, one trailing newline.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import config
from .devices import Device, direct_product, k_reads, make_linear, make_perfect, make_projective
from .errors import AsdError
from .factorization import factor_binary, factor_perfect
from .graphs import Graph, clique_via_reduction, gi_via_equivalence, graph_device
from .invariants import invariant_report, poly_signature, prescreen
from .minimization import minimize, minimize_cached
from .reduction import decide_equivalence, find_reduction, ip_nonequiv_sim
from .witnesses import reduction_from_dict, reduction_to_dict, verify_reduction


def _emit(obj, out_path: str | None) -> None:
    text = json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_device(path: str) -> Device:
    return Device.from_dict(_load_json(path))


def _load_graph(path: str) -> Graph:
    return Graph.from_dict(_load_json(path))


def _signature_certificate(a: Device, b: Device) -> dict | None:
    """Least depth-2 profile whose multiplicities differ, or None.

    Computed on the minimized devices; a difference certifies
    non-equivalence independently of any search.
    """
    from collections import Counter

    sa = Counter(poly_signature(minimize_cached(a).device))
    sb = Counter(poly_signature(minimize_cached(b).device))
    for profile in sorted(set(sa) | set(sb)):
        if sa[profile] != sb[profile]:
            return {
                "depth": 2,
                "profile": list(profile),
                "left_count": sa[profile],
                "right_count": sb[profile],
            }
    return None


# each handler returns the process exit code

def _cmd_gen(args) -> int:
    if args.kind == "cm":
        dev = make_perfect(int(args.params[0]))
    elif args.kind == "pn":
        dev = make_projective(int(args.params[0]))
    elif args.kind == "lnk":
        n = int(args.params[0])
        k = int(args.params[1]) if len(args.params) > 1 else 1
        dev = make_linear(n, k)
    else:  # graph-device
        dev = graph_device(_load_graph(args.params[0]))
    _emit(dev.to_dict(), args.output)
    return 0


def _cmd_show(args) -> int:
    _emit(_load_device(args.file).to_dict(), args.output)
    return 0


def _cmd_minimize(args) -> int:
    dev = _load_device(args.file)
    res = minimize(dev)
    _emit(
        {
            "device": res.device.to_dict(),
            "to_min": reduction_to_dict(dev, res.device, res.to_min),
            "from_min": reduction_to_dict(res.device, dev, res.from_min),
        },
        args.output,
    )
    return 0


def _cmd_invariants(args) -> int:
    _emit(invariant_report(_load_device(args.file)), args.output)
    return 0


def _cmd_product(args) -> int:
    _emit(direct_product(_load_device(args.a), _load_device(args.b)).to_dict(), args.output)
    return 0


def _cmd_kreads(args) -> int:
    _emit(k_reads(_load_device(args.file), args.k).to_dict(), args.output)
    return 0


def _cmd_reduce(args) -> int:
    src = _load_device(args.a)
    dst = _load_device(args.b)
    reason = prescreen(src, dst)
    if reason is not None:
        _emit({"reason": reason}, None)
        return 1
    red = find_reduction(src, dst, screen=False)
    if red is None:
        _emit({"reason": "no φ exists"}, None)
        return 1
    _emit(reduction_to_dict(src, dst, red), None)
    return 0


def _cmd_equiv(args) -> int:
    a = _load_device(args.a)
    b = _load_device(args.b)
    eq = decide_equivalence(a, b)
    if eq is None:
        cert = _signature_certificate(a, b)
        if cert is not None:
            _emit({"reason": "signature", "certificate": cert}, None)
        else:
            _emit({"reason": "not equivalent"}, None)
        return 1
    fwd, back = eq
    _emit(
        {
            "forward": reduction_to_dict(a, b, fwd),
            "backward": reduction_to_dict(b, a, back),
        },
        None,
    )
    return 0


def _cmd_verify(args) -> int:
    src = _load_device(args.a)
    dst = _load_device(args.b)
    red = reduction_from_dict(src, dst, _load_json(args.witness))
    if verify_reduction(src, dst, red):
        _emit({"valid": True}, None)
        return 0
    _emit({"valid": False}, None)
    return 1


def _cmd_factor(args) -> int:
    factors = factor_binary(_load_device(args.file), audit=args.audit)
    verdict = "consistent" if args.audit else "skipped"
    if factors is None:
        _emit({"reason": "not a product of binary devices", "audit": verdict}, None)
        return 1
    _emit({"factors": [f.to_dict() for f in factors], "audit": verdict}, None)
    return 0


def _cmd_factor_perfect(args) -> int:
    factors = factor_perfect(args.m)
    _emit({"m": args.m, "factors": [list(f) for f in factors], "certified": args.m <= 64}, None)
    return 0


def _cmd_clique(args) -> int:
    found, embedding = clique_via_reduction(_load_graph(args.graph), args.k)
    if not found:
        _emit({"reason": f"no {args.k}-clique"}, None)
        return 1
    _emit({"embedding": embedding}, None)
    return 0


def _cmd_gi(args) -> int:
    found, iso = gi_via_equivalence(_load_graph(args.g), _load_graph(args.h))
    if not found:
        _emit({"reason": "not isomorphic"}, None)
        return 1
    _emit({"isomorphism": iso}, None)
    return 0


def _cmd_ip_demo(args) -> int:
    out = ip_nonequiv_sim(_load_device(args.a), _load_device(args.b), args.trials, args.seed)
    _emit(
        {
            "trials": out.trials,
            "accepts": out.accepts,
            "accept_rate": [out.accept_rate.numerator, out.accept_rate.denominator],
        },
        None,
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="asdkit", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a named device")
    p.add_argument("kind", choices=["cm", "pn", "lnk", "graph-device"])
    p.add_argument("params", nargs="+", help="cm M | pn N | lnk N [K] | graph-device FILE")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("show", help="parse and re-emit a device canonically")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_show)

    p = sub.add_parser("minimize", help="minimized device plus both witnesses")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_minimize)

    p = sub.add_parser("invariants", help="capacity, sigma and perfectness index")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_invariants)

    p = sub.add_parser("product", help="direct product of two devices")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_product)

    p = sub.add_parser("kreads", help="close the family under meets of up to K reads")
    p.add_argument("file")
    p.add_argument("k", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=_cmd_kreads)

    p = sub.add_parser("reduce", help="decide A <= B; witness or reason")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(fn=_cmd_reduce)

    p = sub.add_parser("equiv", help="decide A == B; two witnesses or reason")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(fn=_cmd_equiv)

    p = sub.add_parser("verify", help="check a reduction witness")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("witness")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("factor", help="factor into binary devices")
    p.add_argument("file")
    p.add_argument("--audit", action="store_true", help="cross-check uniqueness")
    p.set_defaults(fn=_cmd_factor)

    p = sub.add_parser("factor-perfect", help="prime factorization of a perfect device")
    p.add_argument("m", type=int)
    p.set_defaults(fn=_cmd_factor_perfect)

    p = sub.add_parser("clique", help="k-clique through the device encoding")
    p.add_argument("graph")
    p.add_argument("k", type=int)
    p.set_defaults(fn=_cmd_clique)

    p = sub.add_parser("gi", help="graph isomorphism through device equivalence")
    p.add_argument("g")
    p.add_argument("h")
    p.set_defaults(fn=_cmd_gi)

    p = sub.add_parser("ip-demo", help="non-equivalence game accept rate")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(fn=_cmd_ip_demo)

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except AsdError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
