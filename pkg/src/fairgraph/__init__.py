"""Benchmarking toolkit for fair node classification on attributed graphs."""
from .bench import BenchPlan, BenchReport, run_benchmark
from .graphdata import (AttributedGraph, EdgeType, GraphStats, GroupId, classify_edge_type,
                        compute_stats, load_bundle, save_bundle)
from .metrics import MetricBundle, PredictionSet, evaluate
from .models import EpochLog, EpochRecord, ModelConfig, fit, normalize_adjacency, predict
from .rebalance import RebalanceSpec, apply_rebalance, builtin_recipes
from .selection import SelectionResult, select, select_unified
from .syngen import SynConfig, expected_edge_counts, generate, preset

__version__ = "0.1.0"
