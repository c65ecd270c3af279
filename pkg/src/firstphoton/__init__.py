"""Single-photon image classification with trainable linear optics.

The library answers three questions about classifying an image from the very
first photon that passes through it: how well any interference-free classifier
can possibly do (an exact ceiling computed from the dataset), how much better a
trained unitary transform of the photon state does, and how to realize that
transform as a mesh of beam splitters and phase shifters.
"""

from .classical import (
    ClassPosteriorTable,
    PixelClassMap,
    UNLIT,
    class_entropy,
    class_map,
    classical_mutual_information,
    optimal_accuracy,
    posterior_table,
)
from .datasets import (
    AmplitudeState,
    ClassStyleLayout,
    ExampleImage,
    downsample,
    drop_dark_images,
    encode_dataset,
    load_idx,
    relative_brightness,
    to_amplitudes,
)
from .errors import (
    DarkImageError,
    DatasetMismatchError,
    FirstPhotonError,
    IdxFormatError,
    LayoutError,
    NumericalError,
)
from .evaluation import ClassProjection, EvalReport, InterferenceReport, evaluate, interference_audit, project_example
from .linalg import (
    ExpmConfig,
    UnitaryTransform,
    build_generator,
    expm,
    expm_vjp,
    expm_with_cache,
    real_block_expm,
    unitarity_defect,
    weight_gradient,
)
from .model import (
    Checkpoint,
    ClassProbabilities,
    TrainingConfig,
    batch_gradient,
    forward,
    loss,
    train,
)
from .reck import (
    OpticalBlueprint,
    OpticalElement,
    decompose,
    load_blueprint,
    reconstruct,
    save_blueprint,
)
from .toy import (
    ToyShape,
    baseline_accuracy,
    column_interference_matrix,
    column_transform_accuracy,
    optimal_two_state_accuracy,
    tee_shapes,
    transformed_probabilities,
)

__version__ = "0.1.0"
