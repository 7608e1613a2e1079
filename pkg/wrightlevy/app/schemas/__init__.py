# Schemas package
from .check import CheckResult
from .command import Command, Format, Target, Verb
from .levy import Compensation, LevyTriplet, LongTimeBehaviour
from .params import CbiParams, Family, FamilyParams
from .sim import Direction, PathSample, SampleSet, SimConfig
from .wright import EvalResult, Method, WrightSpec
