import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_forge.qubo import build_rm2_model, to_spin
from ramsey_forge.samples import SampleSet, model_hash


def test_from_reads_aggregates_and_sorts():
    reads = np.array([[1, -1], [-1, -1], [1, -1], [1, 1]])
    s = SampleSet.from_reads(reads, [0.5, -1.0, 0.5, 2.0])
    assert s.num_reads == 4 and len(s) == 3 and s.num_vars == 2
    assert list(s.energies) == [-1.0, 0.5, 2.0]
    assert list(s.counts) == [1, 2, 1]
    assert s.lowest() == -1.0
    assert sorted(map(tuple, s.expand())) == sorted(map(tuple, reads))


def test_from_reads_validates_shape():
    with pytest.raises(ValueError):
        SampleSet.from_reads(np.ones((3, 2)), [0, 0])


def test_csv_roundtrip():
    s = SampleSet.from_reads(np.array([[1, -1, 1], [-1, -1, -1]]), [0.25, -3.0])
    text = s.to_csv()
    assert text.splitlines()[0] == "energy,multiplicity,spins"
    assert "+-+" in text and "---" in text
    assert SampleSet.from_csv(text) == s
    with pytest.raises(ValueError):
        SampleSet.from_csv("energy,multiplicity,spins\n")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.sampled_from([-1, 1]), min_size=3, max_size=3), min_size=1, max_size=30), st.integers(1, 29))
def test_merge_is_order_insensitive(rows, cut):
    reads = np.array(rows)
    energies = reads.sum(axis=1).astype(float)
    cut = min(cut, len(reads))
    a = SampleSet.from_reads(reads[:cut], energies[:cut])
    b = SampleSet.from_reads(reads[cut:], energies[cut:])
    whole = SampleSet.from_reads(reads, energies)
    assert SampleSet.merge(a, b) == SampleSet.merge(b, a) == whole


def test_check_energies_and_hash():
    model = to_spin(build_rm2_model(3))
    reads = np.array([[1, -1, 1, 1], [-1, -1, -1, -1]])
    s = SampleSet.from_reads(reads, model.energies(reads))
    assert s.check_energies(model)
    s.energies[0] += 1
    assert not s.check_energies(model)
    assert model_hash(model) == model_hash(to_spin(build_rm2_model(3)))
    assert model_hash(model) != model_hash(build_rm2_model(3))
