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

#include <optional>
#include <string>

#include "tempref/mrnn.hpp"
#include "tempref/tpl.hpp"

namespace tempref {

/// A trained model of either kind together with the grid it was fit on.
struct Model {
    std::string kind;  // "tpl" | "mrnn"
    Grid grid;
    std::optional<tpl::TplModel> tpl;
    std::optional<mrnn::MrnnParams> mrnn_params;
    std::optional<mrnn::MrnnConfig> mrnn_config;

    int predict(const Alternative& alt) const;
    double value(const Alternative& alt) const;  // comprehensive value U
};

}  // namespace tempref
