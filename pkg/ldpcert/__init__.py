from .code_class import tanner, ensemble, spectrum, is_codeword, codewords, sample_regular_code, avg_distance_spectrum, expurgate_spectrum
from .channel_class import mbios, channel_from_spec, transmit, llr, reflect
from .bp_class import bp_decode, BpOutcome
from .lp_class import lp_decode, objective, ml_certificate, min_distance_lb, fractional_distance, LpSolution, SolverError
from .amlc import amlc_check, AmlcVerdict
from .ds2_class import p1_bound, solve_tilting, optimize_weight, overall_bound, bound_sweep, union_bhattacharyya, Ds2Params, TiltingMeasure, BoundTable, GridConfig, ConvergenceError
from .confidence import xi, binomial_tail_bound, run_algorithm1, run_fer_simulation, recheck_failures, ExperimentConfig, TrialRecord, ConfidenceReport
from .converter import cmd_sample, cmd_spectrum, cmd_decode, cmd_bound, cmd_confidence, cmd_mindist_lb, cmd_fer
from .version import __version__
