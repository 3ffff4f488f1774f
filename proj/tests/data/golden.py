# Regenerates the golden checksums used by the I/O tests and the acceptance
# binary. Independent of the C++ writer: plain struct packing and zlib.
import json
import struct
import zlib

D = 8
N = 1000
COMBOS = [(0, 0), (0, 1), (1, 0), (2, 1)]


def value(i, k):
    return (((i * 31 + k * 7) % 1000) - 500) / 256.0


def dump_bytes():
    out = bytearray(b"GEDT" + struct.pack("<III", 1, D, N))
    for i in range(N):
        variant, role = COMBOS[i % 4]
        out += struct.pack("<IBBH", i // 5, variant, role, i % 3)
        out += struct.pack("<%df" % D, *(value(i, k) for k in range(D)))
    return bytes(out)


def filter_bytes():
    d = 4
    out = bytearray(b"GFLT" + struct.pack("<II", 1, d))
    for i in range(d):
        for j in range(d):
            out += struct.pack("<f", 1.0 if i == j and i % 2 == 0 else 0.0)
    out += struct.pack("<%df" % d, 0.5, -0.25, 0.0, 2.0)
    out += bytes([1, 0, 1, 0])
    trailer = json.dumps({"epsilon": 0.001, "kind": "bias_only", "layer": 3,
                          "model_id": "golden", "probe_hash": "0000abcd"},
                         separators=(",", ":")).encode()
    out += struct.pack("<I", len(trailer)) + trailer
    return bytes(out)


if __name__ == "__main__":
    g = dump_bytes()
    f = filter_bytes()
    print("GEDT size %d crc32 %08x" % (len(g), zlib.crc32(g)))
    print("GFLT size %d crc32 %08x" % (len(f), zlib.crc32(f)))
