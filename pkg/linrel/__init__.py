from pathlib import Path

import gin

BASE_PATH: Path = Path(__file__).parent

gin.add_config_file_search_path(BASE_PATH)
gin.add_config_file_search_path(BASE_PATH.joinpath('configs'))

from .core import *
from .subspace import (CheckResult, FieldTag, Subspace, TolerancePolicy,
                       conjunction)
from .relation import LinearRelation, OperatorSpec, RelationParts
from .characterize import CriterionReport
from .resolvent import NieminenReport, OperatorMatrix, ResolventProbe
from .generate import GenConfig
from .version import __version__
