import json

import numpy as np
import pytest

from nsreg import FieldFormatError, load_field, persist_field


def test_roundtrip(tmp_path, tg32):
    U, P = tg32
    for F in (U, P):
        out = persist_field(F, tmp_path / F.kind)
        G = load_field(out)
        assert G.kind == F.kind and G.names == F.names
        assert np.allclose(G.times, F.times)
        for i in range(len(F)):
            assert np.array_equal(G.values(i), F.values(i))


def test_truncated_component_rejected(tmp_path, tg32):
    U, _ = tg32
    out = persist_field(U, tmp_path / "u")
    victim = sorted(p for p in out.iterdir() if p.suffix != ".json")[0]
    victim.write_bytes(victim.read_bytes()[:-8])
    with pytest.raises(FieldFormatError):
        load_field(out)


def test_bad_manifest_rejected(tmp_path, tg32):
    U, _ = tg32
    out = persist_field(U, tmp_path / "u")
    manifest = json.loads((out / "manifest.json").read_text())
    manifest["endianness"] = "big"
    (out / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(FieldFormatError):
        load_field(out)
    (out / "manifest.json").write_text("{not json")
    with pytest.raises(FieldFormatError):
        load_field(out)
