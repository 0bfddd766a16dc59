from .levy_core import (SymbolField as SymbolField, LevyTriplet as LevyTriplet, ConditionId as ConditionId,
                        Verdict as Verdict, check_conditions as check_conditions, eval_symbol as eval_symbol)
from .catalog import make_catalog_symbol as make_catalog_symbol, make_symbol as make_symbol
from .generator import (TestFunction as TestFunction, make_bump as make_bump, make_gaussian as make_gaussian,
                        apply_integro as apply_integro, apply_fourier as apply_fourier)
from .mollify import mollify_sequence as mollify_sequence
from .simulate import (SDEScheme as SDEScheme, StableLikeScheme as StableLikeScheme,
                       SolutionEnsemble as SolutionEnsemble, simulate_ensemble as simulate_ensemble)
from .verify import CheckResult as CheckResult
from .pipeline import Experiment as Experiment
