# Copyright 2026 The SegGraph Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Few-shot 3D part segmentation with segment graphs."""

from seggraph._core import (
    SegGraphError,
    gradcheck_ops,
    mean_iou,
    parse_seed_list,
    predict,
    read_blob,
    shape_summary,
    synthesize_shape,
    train,
    validate,
    view_quality,
    write_blob,
    write_synthetic_corpus,
)

__all__ = [
    "SegGraphError",
    "gradcheck_ops",
    "mean_iou",
    "parse_seed_list",
    "predict",
    "read_blob",
    "shape_summary",
    "synthesize_shape",
    "train",
    "validate",
    "view_quality",
    "write_blob",
    "write_synthetic_corpus",
]
