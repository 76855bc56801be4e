"""tactran: learning the mapping between heterogeneous tactile sensors.

Synthetic paired-contact generation, array/image interpolation operators,
two learned translator families with a linear baseline, and RMSE/SSIM/IoU
evaluation, behind one CLI.
"""

__version__ = "0.1.0"

from .geometry import (
    PixelGrid,
    TaxelLayout,
    Triangulation,
    build_default_layout,
    default_camera_grid,
    default_tactile_grid,
    delaunay,
    locate,
)
from .interp import FULLSCALE, ArraySample, TactileImage, phi, phi_inv
from .contact import (
    ContactScene,
    ElasticLayer,
    ObjectShape,
    Primitive,
    height_field,
    make_object,
    make_primitive,
    pressure_field,
    sense_array,
    sense_camera,
    solve_penetration,
)
from .metrics import contact_iou, percent_fullscale, rmse, ssim
from .translate import (
    TrainConfig,
    TranslatorModel,
    backward,
    fit_linear_baseline,
    forward,
    l3_loss,
    load_model,
    predict_array,
    save_model,
    train,
)

__all__ = [
    "ArraySample",
    "ContactScene",
    "ElasticLayer",
    "FULLSCALE",
    "ObjectShape",
    "PixelGrid",
    "Primitive",
    "TactileImage",
    "TaxelLayout",
    "TrainConfig",
    "TranslatorModel",
    "Triangulation",
    "backward",
    "build_default_layout",
    "contact_iou",
    "default_camera_grid",
    "default_tactile_grid",
    "delaunay",
    "fit_linear_baseline",
    "forward",
    "height_field",
    "l3_loss",
    "load_model",
    "locate",
    "make_object",
    "make_primitive",
    "percent_fullscale",
    "phi",
    "phi_inv",
    "predict_array",
    "pressure_field",
    "rmse",
    "save_model",
    "sense_array",
    "sense_camera",
    "solve_penetration",
    "ssim",
    "train",
]
