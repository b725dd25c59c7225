// Copyright 2026 The NumNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NUMNET_OPTIM_H_
#define NUMNET_OPTIM_H_

#include <stdexcept>
#include <string>

#include "numnet/tensor.h"

namespace numnet::diff {

struct AdamOptions {
  double lr = 5e-4;
  double beta1 = 0.8;
  double beta2 = 0.999;
  double eps = 1e-7;
  // Classic L2: lambda * theta is added to the gradient before the moments.
  double weight_decay = 1e-7;
};

// Raised when a gradient entry is NaN or infinite.
class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string &param)
      : std::runtime_error("non-finite gradient for parameter '" + param +
                           "'"),
        param_(param) {}
  const std::string &param() const { return param_; }

 private:
  std::string param_;
};

// One bias-corrected Adam update of every parameter. All gradients are
// checked before any parameter is touched.
void AdamStep(ParamStore &params, const Gradients &grads,
              const AdamOptions &options);

double GlobalNorm(const Gradients &grads);

// Rescales so the global L2 norm is at most `max_norm`. Returns the norm
// measured before clipping.
double ClipGradients(Gradients &grads, double max_norm);

// Copies current values into the EMA shadows.
void EmaInit(ParamStore &params);

// shadow <- decay * shadow + (1 - decay) * value. Shadows missing at the
// first call are initialised to the current values. With `warmup`, the
// decay used is min(decay, (1 + n) / (10 + n)) for the n-th update.
void EmaUpdate(ParamStore &params, double decay, bool warmup = false);

// Swaps shadows into the live values for evaluation; EmaSwapOut restores.
// Swapping in twice without swapping out is a ContractError.
void EmaSwapIn(ParamStore &params);
void EmaSwapOut(ParamStore &params);

}  // namespace numnet::diff

#endif  // NUMNET_OPTIM_H_
