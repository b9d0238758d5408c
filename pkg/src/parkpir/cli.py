"""Command-line front end.

Subcommands: `run` executes a full scenario from a JSON config and writes
the trace, the overhead report, and a summary; `fig4`/`fig5` emit the
analytic download-cost sweeps as CSV; `resv-size` prints the reservation
request accounting; `opcount` instruments the credential showing; and
`storage` sizes the ledger after a publication schedule. All CSV output
has a header row and is byte-reproducible for a fixed seed and size table.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import credentials
from .overhead import (
    SizeTable,
    fig4_rows,
    fig5_rows,
    reservation_request_bytes,
    storage_bytes,
)
from .pairing import count_ops, make_backend
from .pir import PirParams
from .sim import ScenarioConfig, ScenarioError, run_scenario


def _write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _load_size_table(path: str | None) -> SizeTable:
    if path is None:
        return SizeTable()
    data = json.loads(Path(path).read_text())
    known = {"g1", "scalar", "hash", "ciphertext_overhead"}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"size table field {sorted(unknown)[0]!r} is not recognized")
    return SizeTable(**data)


def cmd_run(config_path: str, seed: int | None, out_dir: str,
            stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        config = ScenarioConfig.from_json(Path(config_path).read_text())
        if seed is not None:
            config = replace(config, rng_seed=seed)
            config.validate()
    except (OSError, json.JSONDecodeError, ScenarioError, TypeError) as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    try:
        result = run_scenario(config)
    except ScenarioError as exc:
        print(f"invariant violated: {exc}", file=stderr)
        return 1
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.jsonl").write_text(result.trace.to_jsonl())
    with open(out / "report.csv", "w", newline="") as fh:
        _write_csv(fh, ("quantity", "value"), result.report.rows())
    summary = [
        f"trace_digest {result.trace_digest}",
        f"ledger_digest {result.ledger_digests[0]}",
        f"events {len(result.trace.events)}",
        f"final_time_ns {result.trace.now}",
    ]
    summary += [
        f"driver_status {name} {status}" for name, status in sorted(result.statuses.items())
    ]
    (out / "summary.txt").write_text("".join(line + "\n" for line in summary))
    print("\n".join(summary), file=stdout)
    return 0


def cmd_fig4(nodes: int, offers_sweep: list[int], table: SizeTable,
             cells: int = 2, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    params = PirParams(n=nodes, t=1, b=1, r=1)
    for offers in offers_sweep:
        if offers % params.L:
            print(
                f"warning: offers={offers} is not a stripe multiple of L={params.L}; "
                "download computed for the next full stripe",
                file=stderr,
            )
    _write_csv(stdout, ("offers", "pir_bytes", "trivial_bytes"),
               fig4_rows(offers_sweep, n=nodes, cells=cells))
    return 0


def cmd_fig5(offers: int, nodes_sweep: list[int], table: SizeTable,
             cells: int = 100, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    bad = [n for n in nodes_sweep if n <= 4]
    if bad:
        print(f"usage error: n={bad[0]} does not satisfy n > t + 2b + r = 4", file=stderr)
        return 2
    _write_csv(stdout, ("n", "pir_bytes", "trivial_bytes"),
               fig5_rows(nodes_sweep, offers=offers, cells=cells))
    return 0


def cmd_resv_size(table: SizeTable, stdout=None) -> int:
    """Prints the accounting and returns the analytic request size."""
    stdout = stdout or sys.stdout
    analytic = reservation_request_bytes(table)
    measured = _measured_reservation_bytes()
    _write_csv(
        stdout,
        ("quantity", "bytes"),
        [
            ("ciphertext", 2 * table.g1 + table.ciphertext_overhead),
            ("signature", 2 * table.g1 + 2 * table.scalar),
            ("hashes", 2 * table.hash),
            ("analytic_total", analytic),
            ("measured_wire_total", measured),
        ],
    )
    return analytic


def _measured_reservation_bytes() -> int:
    """Wire size of one real request built on the toy backend."""
    from . import envelope

    groups = make_backend("mock")
    rng = np.random.default_rng(0)
    kdc = credentials.Kdc(groups, rng)
    keys = credentials.driver_keygen(groups, kdc.gpk, "meter", rng)
    cred = credentials.finalize_credential(
        groups, kdc.gpk, keys.a2, *kdc.register(keys.request())
    )
    _, enc_pub = envelope.x25519_keypair(rng)
    _, pk_d = envelope.ed25519_keypair(rng)
    ciphertext = envelope.seal(enc_pub, envelope.pack_reservation(pk_d, 0, 3600), rng)
    showing = credentials.randomized_sign(groups, cred, ciphertext, rng)
    return len(ciphertext + showing.to_bytes(groups.order))


def opcount_rows() -> list[tuple[str, int, int, int, int, int]]:
    """Instrumented op counts for building and checking one showing."""
    groups = make_backend("mock")
    rng = np.random.default_rng(0)
    kdc = credentials.Kdc(groups, rng)
    keys = credentials.driver_keygen(groups, kdc.gpk, "opcount", rng)
    cred = credentials.finalize_credential(
        groups, kdc.gpk, keys.a2, *kdc.register(keys.request())
    )
    message = b"opcount probe"
    with count_ops() as gen:
        showing = credentials.randomized_sign(groups, cred, message, rng)
    with count_ops() as ver:
        ok = credentials.verify_sig(groups, kdc.gpk, showing, message)
    if not ok:
        raise RuntimeError("instrumented showing failed to verify")
    rows = []
    for phase, ops in (
        ("reservation_signature_generation", gen),
        ("reservation_signature_verification", ver),
    ):
        rows.append((phase, ops.exp, ops.mul, ops.add, ops.hash, ops.pairing))
    return rows


def cmd_opcount(stdout=None) -> int:
    stdout = stdout or sys.stdout
    _write_csv(stdout, ("phase", "exp", "mul", "add", "hash", "pairing"), opcount_rows())
    return 0


def cmd_storage(offers_per_cell: int, cells: int, blocks_per_day: int, days: int,
                offer_bytes: int = 40, block_overhead: int = 0, stdout=None) -> int:
    stdout = stdout or sys.stdout
    total = storage_bytes(
        offers_per_cell, cells, offer_bytes=offer_bytes,
        block_overhead=block_overhead, blocks_per_day=blocks_per_day, days=days,
    )
    _write_csv(stdout, ("quantity", "bytes"), [("ledger_storage", total)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parkpir",
        description="Private parking-offer retrieval: scenarios and analytic tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario from a JSON config")
    p_run.add_argument("--config", required=True, help="path to a scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default="out", help="directory for trace/report/summary")

    p_f4 = sub.add_parser("fig4", help="download cost vs. offer count (fixed n)")
    p_f4.add_argument("--nodes", type=int, default=44)
    p_f4.add_argument("--offers", type=_int_list,
                      default=[40 * i for i in range(1, 11)],
                      help="comma-separated offer counts")
    p_f4.add_argument("--cells", type=int, default=2)
    p_f4.add_argument("--sizes", default=None, help="JSON size-table override")

    p_f5 = sub.add_parser("fig5", help="download cost vs. node count (fixed offers)")
    p_f5.add_argument("--offers", type=int, default=75)
    p_f5.add_argument("--nodes", type=_int_list,
                      default=[5, 9, 14, 19, 24, 29, 34, 39, 44],
                      help="comma-separated node counts")
    p_f5.add_argument("--cells", type=int, default=100)
    p_f5.add_argument("--sizes", default=None, help="JSON size-table override")

    p_rs = sub.add_parser("resv-size", help="reservation request byte accounting")
    p_rs.add_argument("--sizes", default=None, help="JSON size-table override")

    sub.add_parser("opcount", help="instrumented crypto op counts per phase")

    p_st = sub.add_parser("storage", help="ledger size after a publication schedule")
    p_st.add_argument("--offers-per-cell", type=int, required=True)
    p_st.add_argument("--cells", type=int, required=True)
    p_st.add_argument("--blocks-per-day", type=int, required=True)
    p_st.add_argument("--days", type=int, required=True)
    p_st.add_argument("--offer-bytes", type=int, default=40)
    p_st.add_argument("--block-overhead", type=int, default=0)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.seed, args.out)
        if args.command == "fig4":
            return cmd_fig4(args.nodes, args.offers, _load_size_table(args.sizes),
                            cells=args.cells)
        if args.command == "fig5":
            return cmd_fig5(args.offers, args.nodes, _load_size_table(args.sizes),
                            cells=args.cells)
        if args.command == "resv-size":
            cmd_resv_size(_load_size_table(args.sizes))
            return 0
        if args.command == "opcount":
            return cmd_opcount()
        if args.command == "storage":
            return cmd_storage(
                args.offers_per_cell, args.cells, args.blocks_per_day, args.days,
                offer_bytes=args.offer_bytes, block_overhead=args.block_overhead,
            )
    except (OSError, json.JSONDecodeError, ScenarioError, ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable command dispatch")


if __name__ == "__main__":
    sys.exit(main())
