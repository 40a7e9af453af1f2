from fastweb.config import RunConfig as RunConfig
from fastweb.entire import ComplexPoint as ComplexPoint
from fastweb.entire import FunctionSpec as FunctionSpec
from fastweb.fastesc import compute_RA as compute_RA
from fastweb.field import GridSpec as GridSpec
from fastweb.verify import run_suite as run_suite
