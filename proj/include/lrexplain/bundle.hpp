// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <string>

#include "lrexplain/gmm.hpp"
#include "lrexplain/pca.hpp"

namespace lrexplain {

// The frozen artifact that crosses from training to testing: PCA
// transform plus the two class-conditional GMMs. Serialized as a single
// JSON document; covariances are stored as full row-major matrices and
// Cholesky factors are recomputed (and re-verified SPD) on load.
struct ModelBundle {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::string provider_tag;
  PcaModel pca;
  GmmModel gmm_h0;  // genuine
  GmmModel gmm_h1;  // impostor
  std::map<std::string, std::string> training_metadata;

  void validate() const;
};

void write_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle read_bundle(const std::string& path);

}  // namespace lrexplain
