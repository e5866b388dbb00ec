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

#include "tempref/model.hpp"

namespace tempref {

int Model::predict(const Alternative& alt) const {
    if (kind == "tpl") return tpl::predict(*tpl, alt, grid);
    if (kind == "mrnn")
        return mrnn::predict(*mrnn_params, *mrnn_config, grid, alt);
    throw Error("predict: unknown model kind '" + kind + "'");
}

double Model::value(const Alternative& alt) const {
    const auto enc = encode(alt, grid);
    if (kind == "tpl")
        return comprehensive_value(tpl->pvf, enc, tpl->schedule);
    if (kind == "mrnn")
        return mrnn::forward(*mrnn_params, *mrnn_config, enc).comprehensive;
    throw Error("value: unknown model kind '" + kind + "'");
}

}  // namespace tempref
