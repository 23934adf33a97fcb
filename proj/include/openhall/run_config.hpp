#pragma once

#include <optional>
#include <string>
#include <vector>

#include "openhall/config.hpp"
#include "openhall/lindblad.hpp"
#include "openhall/model.hpp"
#include "openhall/quadrature.hpp"
#include "openhall/response.hpp"

namespace openhall {

/// Builtin model by `model = "<name>"` with its parameters as top-level keys, or
/// `model = "custom"` with term tables `dx`, `dy`, `dz`, `offset` (each entry
/// [coef, "cos"|"sin"|"poly"|"const", a, b]) and a `[domain]` table.
/// `lift = "spin_one"` turns a two-band model into its three-band spin-one form.
Model parse_model_config(const Config& doc);

/// `dissipator` in {single_band, two_band, spin_lowering} with `gamma` (scalar or per band),
/// `target`, `targets`, `weights` and `gamma2` (second-target rates for two_band).
DissipatorSpec parse_dissipator_config(const Config& doc, int bands);

struct GridSettings {
  int resolution = 64;
  std::optional<double> k_min, k_max;
  IntegrationOptions integration;
};

GridSettings parse_grid_config(const Config& doc);
/// Grid over the model's Hall integration zone (or its full domain when `full_domain`).
BZGrid grid_for(const Model& model, const GridSettings& g, bool full_domain = false);

FieldConfig parse_field_config(const Config& doc);
Momentum parse_point_config(const Config& doc);

struct SweepAxis {
  std::string key;
  double start = 0.0, stop = 0.0;
  int count = 2;
  std::vector<double> values() const;
};

/// `[sweep]` entries `key = [start, stop, count]`; keys must be model parameters or `gamma`.
std::vector<SweepAxis> parse_sweep_config(const Config& doc);

/// Parameter names a builtin model accepts (empty for custom models).
std::vector<std::string> model_parameter_keys(const std::string& model);

}  // namespace openhall
