"""
Reversing operators, λ schedules and training objectives for trsoden.
"""

__version__ = "0.1.0"

from .symmetry import ReversalKind, ReversingOperator, apply_reversing
from .schedules import ScheduleKind, LambdaSchedule, lambda_value
from .objectives import (
    SegmentBatch,
    batch_segments,
    resolve_field,
    ode_loss,
    reversal_chains,
    trs_loss,
    trs_loss_nonautonomous,
    LossTerms,
    combined_loss,
)

__all__ = [
    'ReversalKind',
    'ReversingOperator',
    'apply_reversing',
    'ScheduleKind',
    'LambdaSchedule',
    'lambda_value',
    'SegmentBatch',
    'batch_segments',
    'resolve_field',
    'ode_loss',
    'reversal_chains',
    'trs_loss',
    'trs_loss_nonautonomous',
    'LossTerms',
    'combined_loss',
]
