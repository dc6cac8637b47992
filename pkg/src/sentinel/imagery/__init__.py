from .records import (
    CLASS_TO_ID,
    ID_TO_CLASS,
    SPLIT_RATIOS,
    STANDARD_SIZE,
    Annotation,
    AugmentationSpec,
    ClassLabel,
    DatasetManifest,
    EmptyManifest,
    ImageRecord,
    ImageryError,
    InvalidRange,
    ManifestInvalid,
    Source,
    Split,
    UnreadableFile,
    UnsupportedFormat,
    ZeroDimension,
)
from .io import (
    load_image,
    load_manifest,
    manifest_from_dict,
    manifest_to_dict,
    read_annotations,
    save_manifest,
    write_annotations,
)
from .splits import assign_splits, split_counts
from .transforms import augment, resize_bilinear, resize_to_standard, transform_box

__all__ = [
    "CLASS_TO_ID",
    "ID_TO_CLASS",
    "SPLIT_RATIOS",
    "STANDARD_SIZE",
    "Annotation",
    "AugmentationSpec",
    "ClassLabel",
    "DatasetManifest",
    "EmptyManifest",
    "ImageRecord",
    "ImageryError",
    "InvalidRange",
    "ManifestInvalid",
    "Source",
    "Split",
    "UnreadableFile",
    "UnsupportedFormat",
    "ZeroDimension",
    "load_image",
    "load_manifest",
    "manifest_from_dict",
    "manifest_to_dict",
    "read_annotations",
    "save_manifest",
    "write_annotations",
    "assign_splits",
    "split_counts",
    "augment",
    "resize_bilinear",
    "resize_to_standard",
    "transform_box",
]
