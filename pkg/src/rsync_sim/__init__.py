"""Simulate task execution on a rhythmically moving platform.

Three ways of coping with the motion are compared: ignoring it, tracking it
continuously from a fitted sinusoid model, and timing each command to land
at an extremum of the dominant motion axis.
"""

from .control import (FULL_SYNC, INTERMITTENT, NO_SYNC, ActuationModel, Decision, ExecutionLog, cumulative_error,
                      execute, make_policy, plan_full_sync, plan_intermittent, plan_no_sync)
from .estimation import (ExtremaSchedule, SineFit, dominant_axis, extrema_schedule, extremum_error, fit_all, fit_axis,
                         window_halfwidth, worst_case_error)
from .motion import (BREATHING, SINUSOIDAL, PlatformVariation, Pose6, RhythmicMotion, Waveform, amplitude,
                     apply_motion, eval_waveform, motion_pose, period)
from .sensing import SensorModel, TrackSeries, observe, read_track, write_track
from .tasks import CuttingTask, DebridementTask, TrialReport, grasp_rate, run_cutting, run_debridement

__version__ = "0.1.0"
