"""Builders and tamper helpers shared across the test modules."""

from __future__ import annotations

import dataclasses

from tcgw import (
    Ledger,
    PrivateNode,
    SensorReading,
    Transaction,
    append_block,
    genesis,
    reading_transaction,
)
from tcgw.rng import SplitMix64, derive_seed


def make_reading(i: int, sensor: str = "s-0", metric: str = "temperature_c",
                 value: str | None = None, timestamp: int | None = None) -> SensorReading:
    return SensorReading(sensor, metric, value if value is not None else f"{20 + i % 10}.5",
                         timestamp if timestamp is not None else i)


def reading_tx(channel: str, i: int, **kwargs) -> Transaction:
    return reading_transaction(channel, make_reading(i, **kwargs))


def build_ledger(channel: str = "fieldA", n_txs: int = 50, per_block: int = 1) -> Ledger:
    """Ledger of n_txs single-reading transactions, per_block per block."""
    ledger = genesis(channel)
    for start in range(0, n_txs, per_block):
        txs = [reading_tx(channel, i) for i in range(start, min(start + per_block, n_txs))]
        ledger, _ = append_block(ledger, txs, txs[-1].timestamp)
    return ledger


def node_with_readings(channel: str = "fieldA", n: int = 60,
                       window_start: int = 0, spacing: int = 10,
                       sensor: str = "s-0", seed: int = 7) -> PrivateNode:
    """Committed node whose readings all fall in [window_start, window_start+n*spacing)."""
    node = PrivateNode(channel, {sensor})
    rng = SplitMix64(derive_seed(seed, channel))
    for i in range(n):
        ts = window_start + i * spacing
        reading = SensorReading(sensor, "temperature_c", f"{rng.uniform(5, 35):.3f}", ts)
        node.clock = ts
        node.submit(reading_transaction(channel, reading))
    while node.mempool:
        node.commit_batch()
    return node


def flip_byte(data: bytes, index: int, bit: int = 0x01) -> bytes:
    return data[:index] + bytes([data[index] ^ bit]) + data[index + 1:]


def tamper_ledger(ledger: Ledger, height: int, target: str,
                  byte_index: int = 0, tx_index: int = 0) -> Ledger:
    """Copy of `ledger` with one byte flipped in the chosen field of block `height`."""
    block = ledger.blocks[height]
    if target == "payload":
        tx = block.transactions[tx_index]
        new_tx = dataclasses.replace(tx, payload=flip_byte(tx.payload, byte_index))
        txs = block.transactions[:tx_index] + (new_tx,) + block.transactions[tx_index + 1:]
        new_block = dataclasses.replace(block, transactions=txs)
    elif target == "tx_id":
        tx = block.transactions[tx_index]
        new_tx = dataclasses.replace(tx, tx_id=flip_byte(tx.tx_id, byte_index))
        txs = block.transactions[:tx_index] + (new_tx,) + block.transactions[tx_index + 1:]
        new_block = dataclasses.replace(block, transactions=txs)
    elif target == "tx_root":
        new_block = dataclasses.replace(block, tx_root=flip_byte(block.tx_root, byte_index))
    elif target == "previous_hash":
        new_block = dataclasses.replace(block, previous_hash=flip_byte(block.previous_hash, byte_index))
    elif target == "block_hash":
        new_block = dataclasses.replace(block, block_hash=flip_byte(block.block_hash, byte_index))
    else:
        raise ValueError(f"unknown tamper target {target}")
    blocks = ledger.blocks[:height] + (new_block,) + ledger.blocks[height + 1:]
    return dataclasses.replace(ledger, blocks=blocks)
