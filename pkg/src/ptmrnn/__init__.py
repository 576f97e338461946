"""Exact-rational toolkit for probabilistic Turing machines, two-stack automata and RNN language models."""

from ptmrnn.equivalence import (
    EquivReport,
    check_ptm_path_law,
    check_statistical,
    check_strong_multiset,
    check_weak,
)
from ptmrnn.fileformat import SpecError, parse_spec, serialize
from ptmrnn.machines import (
    MachineError,
    Ptm,
    Qptm,
    RnnLm,
    TwoPda,
    TwoPdaFull,
    is_deterministic,
    is_rd,
    is_real_time,
    is_sigma_deterministic,
    validate,
)
from ptmrnn.simulate import (
    CUTOFF,
    BudgetExceeded,
    enumerate_paths,
    halting_mass,
    rnn_lockstep,
    rnn_step,
    sample,
    semimeasure,
)
from ptmrnn.transforms import (
    binarize,
    compile_rnn,
    dyadicize,
    ptm_to_qptm,
    qptm_to_2pda,
    reduce_both_stack_dependence,
    run_pass,
    run_pipeline,
    twopda_to_qptm,
)

__version__ = "0.1.0"

__all__ = [
    "CUTOFF",
    "BudgetExceeded",
    "EquivReport",
    "MachineError",
    "Ptm",
    "Qptm",
    "RnnLm",
    "SpecError",
    "TwoPda",
    "TwoPdaFull",
    "binarize",
    "check_ptm_path_law",
    "check_statistical",
    "check_strong_multiset",
    "check_weak",
    "compile_rnn",
    "dyadicize",
    "enumerate_paths",
    "halting_mass",
    "is_deterministic",
    "is_rd",
    "is_real_time",
    "is_sigma_deterministic",
    "parse_spec",
    "ptm_to_qptm",
    "qptm_to_2pda",
    "reduce_both_stack_dependence",
    "rnn_lockstep",
    "rnn_step",
    "run_pass",
    "run_pipeline",
    "sample",
    "semimeasure",
    "serialize",
    "twopda_to_qptm",
]
