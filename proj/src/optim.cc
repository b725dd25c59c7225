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

#include "numnet/optim.h"

#include <algorithm>
#include <cmath>

namespace numnet::diff {

void AdamStep(ParamStore &params, const Gradients &grads,
              const AdamOptions &options) {
  for (const auto &entry : params.entries()) {
    auto it = grads.find(entry.name);
    if (it == grads.end()) {
      throw ContractError("no gradient for parameter '" + entry.name + "'");
    }
    if (!it->second.allFinite()) throw NonFiniteGradient(entry.name);
  }

  params.adam_steps += 1;
  double t = static_cast<double>(params.adam_steps);
  double correction1 = 1.0 - std::pow(options.beta1, t);
  double correction2 = 1.0 - std::pow(options.beta2, t);
  for (auto &entry : params.mutable_entries()) {
    Matrix g = grads.at(entry.name) + options.weight_decay * entry.value;
    entry.adam_m = options.beta1 * entry.adam_m + (1.0 - options.beta1) * g;
    entry.adam_v = options.beta2 * entry.adam_v +
                   (1.0 - options.beta2) * g.cwiseProduct(g);
    auto m_hat = entry.adam_m.array() / correction1;
    auto v_hat = entry.adam_v.array() / correction2;
    entry.value.array() -= options.lr * m_hat / (v_hat.sqrt() + options.eps);
  }
}

double GlobalNorm(const Gradients &grads) {
  double total = 0.0;
  for (const auto &[name, g] : grads) total += g.squaredNorm();
  return std::sqrt(total);
}

double ClipGradients(Gradients &grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ContractError("max_norm must be positive");
  double norm = GlobalNorm(grads);
  if (norm > max_norm) {
    double factor = max_norm / norm;
    for (auto &[name, g] : grads) g *= factor;
  }
  return norm;
}

void EmaInit(ParamStore &params) {
  if (params.ema_swapped_in) {
    throw ContractError("cannot reset EMA while shadows are swapped in");
  }
  for (auto &entry : params.mutable_entries()) entry.shadow = entry.value;
  params.ema_updates = 0;
}

void EmaUpdate(ParamStore &params, double decay, bool warmup) {
  if (params.ema_swapped_in) {
    throw ContractError("EMA update while shadows are swapped in");
  }
  double effective = decay;
  if (warmup) {
    double n = static_cast<double>(params.ema_updates + 1);
    effective = std::min(decay, (1.0 + n) / (10.0 + n));
  }
  for (auto &entry : params.mutable_entries()) {
    if (entry.shadow.size() != entry.value.size()) entry.shadow = entry.value;
    entry.shadow = effective * entry.shadow + (1.0 - effective) * entry.value;
  }
  params.ema_updates += 1;
}

void EmaSwapIn(ParamStore &params) {
  if (params.ema_swapped_in) {
    throw ContractError("EMA shadows already swapped in");
  }
  for (auto &entry : params.mutable_entries()) {
    if (entry.shadow.size() != entry.value.size()) entry.shadow = entry.value;
    std::swap(entry.value, entry.shadow);
  }
  params.ema_swapped_in = true;
}

void EmaSwapOut(ParamStore &params) {
  if (!params.ema_swapped_in) {
    throw ContractError("EMA shadows are not swapped in");
  }
  for (auto &entry : params.mutable_entries()) {
    std::swap(entry.value, entry.shadow);
  }
  params.ema_swapped_in = false;
}

}  // namespace numnet::diff
