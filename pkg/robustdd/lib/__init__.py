from . import plants
from . import scenarios
