/*
 Copyright 2026 the tempref authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <string>
#include <vector>

#include "tempref/model.hpp"

namespace tempref::io {

/// Wide CSV: header `id,label,g<j>_t<t>` with j outer; blank label allowed.
/// m, T and the class count are inferred from the header and labels.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

/// JSON with a `kind` discriminator and `schema_version` 1; numeric round
/// trips are lossless.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

/// Writes `marginals.csv` (criterion, timestamp, point_index, g_value,
/// sub_marginal) and, for mRNN models, `discounts.csv` (sample_id, criterion,
/// timestamp, tau) under out_dir.
void export_tables(const Model& model,
                   const std::vector<EncodedAlternative>& sample,
                   const std::string& out_dir);

/// Locale-independent, 17 significant digits.
std::string format_double(double value);

}  // namespace tempref::io
