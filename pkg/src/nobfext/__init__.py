"""Multi-bit extraction from non-oblivious bit-fixing sources.

A source is n bits where q adversarial "bad" coordinates may depend
arbitrarily on the remaining good coordinates, which are t-wise
independent.  The extractor splits the input into blocks, applies a
boolean function per block, and compresses the per-block bits through
the generator matrix of a distance-verified linear code.  Exact
desk-scale oracles (full source enumeration, influence scans, bias
spectra) back every quantitative claim the pipeline's analysis rests on.
"""

from .errors import (DimensionError, NobfError, SearchBudgetExceeded,
                     ValidationError, WorkCapExceeded)
from .gf2 import (BitMatrix, BitVector, gf2_matvec, gf2_rank, hamming_weight,
                  row_combination)
from .sources import (ConstantAdversary, Distribution, EpsBiased, ExactTwise,
                      ExplicitTable, MajorityOfGood, NobfSourceSpec,
                      ParityOfGood, TableAdversary, UniformBits,
                      enumerate_nobf, epsbiased_sample, irreducible_poly,
                      read_sample_batch, sample_nobf, sample_nobf_batch,
                      twise_sample, verify_twise, work_cap,
                      write_sample_batch, zeroed_counterpart)
from .resilient import (Majority, RecursiveMajority3, ResilientFunction,
                        TableFunction, Tribes, bias_under,
                        default_block_function, function_from_descriptor,
                        influence_exact, influence_max_exact, influence_mc,
                        is_monotone)
from .codes import (LinearCode, build_good_code, compress, encode,
                    encode_message, min_distance_exact, preset_code)
from .stats import (BiasSpectrum, Estimate, VaziraniReport, XorBiasReport,
                    clopper_pearson, fwht, linear_test_bias, parseval_bound,
                    sd_to_uniform_empirical, statistical_distance,
                    vazirani_check, xor_bias_product, xor_distance_brute)
from .bfext import (BfextParams, CompareZeroedReport, ExtractionTrace,
                    WorstAdversaryReport, compare_zeroed, derive_params,
                    explicit_params, extract, extract_batch,
                    fixedness_probability, output_distribution, partition,
                    worst_case_adversary)

__version__ = "0.1.0"

__all__ = [
    "BfextParams", "BiasSpectrum", "BitMatrix", "BitVector",
    "CompareZeroedReport", "ConstantAdversary", "DimensionError",
    "Distribution", "EpsBiased", "Estimate", "ExactTwise", "ExplicitTable",
    "ExtractionTrace", "LinearCode", "Majority", "MajorityOfGood",
    "NobfError", "NobfSourceSpec", "ParityOfGood", "RecursiveMajority3",
    "ResilientFunction", "SearchBudgetExceeded", "TableAdversary",
    "TableFunction", "Tribes", "UniformBits", "ValidationError",
    "VaziraniReport", "WorkCapExceeded", "WorstAdversaryReport",
    "XorBiasReport", "bias_under", "build_good_code", "clopper_pearson",
    "compare_zeroed", "compress", "default_block_function", "derive_params",
    "encode", "encode_message", "enumerate_nobf", "epsbiased_sample",
    "explicit_params", "extract", "extract_batch", "fixedness_probability",
    "function_from_descriptor", "fwht", "gf2_matvec", "gf2_rank",
    "hamming_weight", "influence_exact", "influence_max_exact",
    "influence_mc", "irreducible_poly", "is_monotone", "linear_test_bias",
    "min_distance_exact", "output_distribution", "parseval_bound",
    "partition", "preset_code", "read_sample_batch", "row_combination",
    "sample_nobf", "sample_nobf_batch", "sd_to_uniform_empirical",
    "statistical_distance", "twise_sample", "vazirani_check", "verify_twise",
    "work_cap", "worst_case_adversary", "write_sample_batch",
    "xor_bias_product", "xor_distance_brute", "zeroed_counterpart",
]
