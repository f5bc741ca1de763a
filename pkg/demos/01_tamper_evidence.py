"""Hash-linked blocks make any edit visible.

We build a small chain of sensor readings, flip a single byte deep inside
one transaction payload, and watch verification name the broken block.
"""

import dataclasses

from tcgw import (
    SensorReading,
    append_block,
    genesis,
    head,
    ledger_size_bytes,
    reading_transaction,
    verify_chain,
)

# A private ledger for one field. Block 0 is the genesis: all-zero
# previous hash, no transactions.
ledger = genesis("demo-field")
print(f"genesis head: height={head(ledger)[0]} hash={head(ledger)[1].hex()[:16]}...")

# Append ten blocks of three readings each. Values are decimal strings;
# the transaction id is a digest over the full canonical encoding.
for block_index in range(10):
    txs = []
    for s in range(3):
        ts = block_index * 60 + s
        reading = SensorReading(f"s-{s}", "temperature_c", f"{18 + s}.{block_index}", ts)
        txs.append(reading_transaction("demo-field", reading))
    ledger, block = append_block(ledger, txs, txs[-1].timestamp)
    assert block.previous_hash == ledger.blocks[block.height - 1].block_hash

print(f"built {len(ledger.blocks)} blocks, {ledger_size_bytes(ledger)} bytes on disk")
print(f"verify untouched chain: {verify_chain(ledger)}")

# Now the attack: change one byte of a committed value in block 6.
victim = ledger.blocks[6]
tx = victim.transactions[1]
tampered_tx = dataclasses.replace(tx, payload=tx.payload.replace(b"19.", b"99.", 1))
tampered_block = dataclasses.replace(
    victim, transactions=victim.transactions[:1] + (tampered_tx,) + victim.transactions[2:])
tampered = dataclasses.replace(
    ledger, blocks=ledger.blocks[:6] + (tampered_block,) + ledger.blocks[7:])

report = verify_chain(tampered)
print(f"verify tampered chain:  ok={report.ok} "
      f"first_bad_height={report.first_bad_height} reason={report.reason.value}")
assert not report.ok and report.first_bad_height == 6

# The original value is untouched; ledgers are immutable snapshots.
assert verify_chain(ledger).ok
print("original ledger still verifies; a copy was tampered, not the chain")
