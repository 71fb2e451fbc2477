"""covlab: finite covers of varieties over finite fields, checked by enumeration."""

__version__ = "0.1.0"

from .config import BudgetExceeded, budget, get_budget, set_budget
from .ffield import Element, FieldSpec, extend_field, make_field, parse_field
from .mpoly import Multinomial, ParseError, jacobian, parse
from .geometry import (
    AFFINE, PROJECTIVE, GeometryError, Point, VarietyDesc, count_points, enumerate_points,
    is_smooth_at, singular_points,
)
from .covers import (
    CoverDesc, CoverError, NotGenericallyEtale, StarReport, StarRow, affine_line_map,
    fiber_product_pairs, image_count, injective_on, kummer_exceptionality_oracle,
    pair_counts, ramification_points, star_report, star_row, surjective_on,
)
from .bounds import (
    BettiVector, HodgeDiamond, crossover_threshold, hodge_candidates, nonempty_threshold,
    surface_embedding_data,
)
from .constructions import builtin_examples, kummer_cover, product_cover, search_section
from .problem import dumps, load_problem, loads
