"""Ramsey numbers as ground-state problems: graph encoding, quadratic
models, Chimera embedding, classical and simulated quantum annealing, and
exhaustive oracles."""
from .analysis import (
    EnergyHistogram,
    OracleSolver,
    SamplerSolver,
    boltzmann_fit,
    equal_energy_dispersion,
    histogram,
    noise_robustness,
    qa_sampler,
    ramsey_protocol,
    repetition_count,
    sa_sampler,
)
from .anneal import CoolingSchedule, simulated_anneal, steepest_descent, success_statistics
from .chimera import HardwareGraph, chimera_graph, default_hardware
from .cost import RamseyInstance, count_cliques, count_independent, ramsey_energy
from .embedding import Embedding, EmbeddedModel, embed_model, find_embedding, tune_lambda, unembed, validate_embedding
from .graphs import GraphBits, edge_index, format_graph, parse_graph
from .oracle import GroundTruth, exhaustive_ground, exhaustive_model_ground
from .quantum import AnnealSchedule, evolve, ground_probability, instantaneous_spectrum, measure_energies, sample_anneal
from .qubo import (
    QuadraticModel,
    Vartype,
    build_r33_model,
    build_rm2_model,
    compile_instance,
    normalize_ranges,
    to_binary,
    to_spin,
)
from .samples import SampleSet

__version__ = "0.1.0"
