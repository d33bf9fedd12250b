// SPDX-License-Identifier: Apache-2.0
#include "mdim/process.hpp"

#include <cmath>

#include "mdim/error.hpp"
#include "mdim/numerics.hpp"

namespace mdim {
namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

using json = nlohmann::json;

Vec vec_or_zero(const json& j, const char* key, int dim) {
  if (!j.contains(key)) return {};
  Vec v = j.at(key).get<Vec>();
  require(static_cast<int>(v.size()) == dim, std::string(key) + " has wrong dimension");
  return v;
}

StableLikeKernel::Form kernel_form(const std::string& s) {
  if (s == "constant") return StableLikeKernel::Form::constant;
  if (s == "sin2") return StableLikeKernel::Form::sin2;
  if (s == "aniso") return StableLikeKernel::Form::aniso;
  if (s == "radial") return StableLikeKernel::Form::radial;
  fail("unknown kernel form '" + s + "' (constant, sin2, aniso, radial)");
}

const char* kernel_form_name(StableLikeKernel::Form f) {
  switch (f) {
    case StableLikeKernel::Form::constant: return "constant";
    case StableLikeKernel::Form::sin2: return "sin2";
    case StableLikeKernel::Form::aniso: return "aniso";
    case StableLikeKernel::Form::radial: return "radial";
  }
  return "constant";
}

}  // namespace

int ProcessSpec::dim() const {
  return std::visit(
      overloaded{[](const BrownianMotion& b) { return b.dim; },
                 [](const StableLevy& s) { return s.spectral.dim; },
                 [](const Subordinator&) { return 1; },
                 [](const Subordinated& s) { return s.base ? s.base->dim() : 0; },
                 [](const StableLike& s) { return s.kernel.dim; },
                 [](const JumpDiffusion& j) { return j.spec.dim; },
                 [](const ZeroProcess& z) { return z.dim; }},
      family);
}

bool ProcessSpec::is_levy() const {
  return std::visit(
      overloaded{[](const StableLike& s) { return !s.kernel.depends_on_x(); },
                 [](const JumpDiffusion& j) {
                   return j.spec.measure.state_free() &&
                          j.spec.drift.form != DriftField::Form::cosine;
                 },
                 [](const Subordinated& s) { return s.base && s.base->is_levy(); },
                 [](const auto&) { return true; }},
      family);
}

double ProcessSpec::natural_H() const {
  return std::visit(
      overloaded{[](const BrownianMotion&) { return 0.5; },
                 [](const StableLevy& s) { return 1.0 / s.spectral.alpha; },
                 [](const Subordinator& s) { return 1.0 / s.rho; },
                 [](const Subordinated& s) {
                   return s.base ? s.base->natural_H() / s.rho : 0.0;
                 },
                 [](const StableLike& s) { return 1.0 / s.kernel.alpha; },
                 [](const JumpDiffusion& j) { return 1.0 / j.spec.alpha; },
                 [](const ZeroProcess&) { return 0.0; }},
      family);
}

std::string ProcessSpec::kind() const {
  return std::visit(overloaded{[](const BrownianMotion&) { return "brownian"; },
                               [](const StableLevy&) { return "stable"; },
                               [](const Subordinator&) { return "subordinator"; },
                               [](const Subordinated&) { return "subordinated"; },
                               [](const StableLike&) { return "stable_like"; },
                               [](const JumpDiffusion&) { return "jump_diffusion"; },
                               [](const ZeroProcess&) { return "zero"; }},
                    family);
}

void ProcessSpec::validate() const {
  std::visit(
      overloaded{
          [](const BrownianMotion& b) {
            require(b.dim >= 1, "dimension must be >= 1");
            require(b.sigma > 0 && std::isfinite(b.sigma), "sigma must be positive");
          },
          [](const StableLevy& s) { s.spectral.validate(); },
          [](const Subordinator& s) {
            require(s.rho > 0 && s.rho < 1, "subordinator index rho must lie in (0, 1)");
          },
          [](const Subordinated& s) {
            require(s.base != nullptr, "subordinated process needs a base process");
            require(s.rho > 0 && s.rho < 1, "subordinator index rho must lie in (0, 1)");
            require(s.base_refine >= 1, "base_refine must be >= 1");
            require(s.horizon_multiplier > 1, "horizon_multiplier must exceed 1");
            s.base->validate();
          },
          [](const StableLike& s) { s.kernel.validate(); },
          [](const JumpDiffusion& j) { j.spec.validate(); },
          [](const ZeroProcess& z) { require(z.dim >= 1, "dimension must be >= 1"); }},
      family);
}

ProcessSpec brownian(int dim, double sigma) { return {BrownianMotion{dim, sigma}}; }

double isotropic_uniform_mass(int dim, double alpha, double scale) {
  return scale / sphere_moment(dim, alpha);
}

ProcessSpec isotropic_stable(int dim, double alpha, double scale) {
  StableSpectralSpec s;
  s.alpha = alpha;
  s.dim = dim;
  s.measure.uniform = true;
  s.measure.uniform_mass = isotropic_uniform_mass(dim, alpha, scale);
  return {StableLevy{std::move(s)}};
}

ProcessSpec stable_from_spectral(StableSpectralSpec spec) {
  return {StableLevy{std::move(spec)}};
}

ProcessSpec subordinator(double rho) { return {Subordinator{rho}}; }

ProcessSpec subordinated(ProcessSpec base, double rho) {
  Subordinated s;
  s.base = std::make_shared<const ProcessSpec>(std::move(base));
  s.rho = rho;
  return {std::move(s)};
}

ProcessSpec stable_like(StableLikeKernel kernel) { return {StableLike{kernel}}; }
ProcessSpec jump_diffusion(JumpDiffusionSpec spec) { return {JumpDiffusion{std::move(spec)}}; }
ProcessSpec zero_process(int dim) { return {ZeroProcess{dim}}; }

StableSpectralSpec isotropic_equivalent(const StableLikeKernel& k) {
  require(!k.depends_on_x() && !k.depends_on_z(),
          "isotropic equivalent exists for constant kernels only");
  const double scale = k.base * isotropic_density_constant(k.dim, k.alpha);
  StableSpectralSpec s;
  s.alpha = k.alpha;
  s.dim = k.dim;
  s.measure.uniform = true;
  s.measure.uniform_mass = isotropic_uniform_mass(k.dim, k.alpha, scale);
  return s;
}

json to_json(const ProcessSpec& spec) {
  return std::visit(
      overloaded{
          [](const BrownianMotion& b) -> json {
            return {{"type", "brownian"}, {"dim", b.dim}, {"sigma", b.sigma}};
          },
          [](const StableLevy& s) -> json {
            json j = {{"type", "stable"},
                      {"alpha", s.spectral.alpha},
                      {"dim", s.spectral.dim},
                      {"spectral", to_json(s.spectral.measure)}};
            if (!s.spectral.shift.empty()) j["shift"] = s.spectral.shift;
            return j;
          },
          [](const Subordinator& s) -> json {
            return {{"type", "subordinator"}, {"rho", s.rho}};
          },
          [](const Subordinated& s) -> json {
            return {{"type", "subordinated"},
                    {"rho", s.rho},
                    {"base", to_json(*s.base)},
                    {"base_refine", s.base_refine},
                    {"horizon_multiplier", s.horizon_multiplier}};
          },
          [](const StableLike& s) -> json {
            const auto& k = s.kernel;
            return {{"type", "stable_like"},
                    {"alpha", k.alpha},
                    {"dim", k.dim},
                    {"kernel",
                     {{"form", kernel_form_name(k.form)},
                      {"base", k.base},
                      {"amp", k.amp},
                      {"freq", k.freq},
                      {"beta", k.beta}}}};
          },
          [](const JumpDiffusion& jd) -> json {
            const auto& s = jd.spec;
            json drift = {{"form", s.drift.form == DriftField::Form::zero
                                       ? "zero"
                                       : (s.drift.form == DriftField::Form::constant
                                              ? "constant"
                                              : "cosine")}};
            if (s.drift.form != DriftField::Form::zero) drift["v"] = s.drift.v;
            json m;
            if (s.measure.uniform) {
              m = {{"uniform_mass", s.measure.uniform_mass},
                   {"uniform_amp", s.measure.uniform_amp}};
            } else {
              json atoms = json::array();
              for (std::size_t k = 0; k < s.measure.atoms.size(); ++k) {
                atoms.push_back(
                    {{"direction", s.measure.atoms[k].direction},
                     {"weight", s.measure.atoms[k].weight},
                     {"amp", s.measure.atom_amp.empty() ? 0.0 : s.measure.atom_amp[k]}});
              }
              m = {{"atoms", atoms}};
            }
            return {{"type", "jump_diffusion"},
                    {"alpha", s.alpha},
                    {"dim", s.dim},
                    {"drift", drift},
                    {"measure", m}};
          },
          [](const ZeroProcess& z) -> json { return {{"type", "zero"}, {"dim", z.dim}}; }},
      spec.family);
}

ProcessSpec process_from_json(const json& j) {
  require(j.is_object(), "process block must be an object");
  const std::string type = j.at("type").get<std::string>();
  ProcessSpec out;
  if (type == "brownian") {
    out = brownian(j.value("dim", 1), j.value("sigma", 1.0));
  } else if (type == "stable") {
    StableSpectralSpec s;
    s.alpha = j.at("alpha").get<double>();
    s.dim = j.value("dim", 1);
    const json spectral = j.value("spectral", json{{"isotropic_scale", 1.0}});
    if (spectral.contains("isotropic_scale")) {
      s.measure.uniform = true;
      s.measure.uniform_mass =
          isotropic_uniform_mass(s.dim, s.alpha, spectral.at("isotropic_scale").get<double>());
    } else {
      s.measure = angular_measure_from_json(spectral, s.dim);
    }
    s.shift = vec_or_zero(j, "shift", s.dim);
    out = stable_from_spectral(std::move(s));
  } else if (type == "subordinator") {
    out = subordinator(j.at("rho").get<double>());
  } else if (type == "subordinated") {
    Subordinated s;
    s.base = std::make_shared<const ProcessSpec>(process_from_json(j.at("base")));
    s.rho = j.at("rho").get<double>();
    s.base_refine = j.value("base_refine", 16);
    s.horizon_multiplier = j.value("horizon_multiplier", 1e8);
    out = {std::move(s)};
  } else if (type == "stable_like") {
    StableLikeKernel k;
    k.alpha = j.at("alpha").get<double>();
    k.dim = j.value("dim", 1);
    const json kj = j.value("kernel", json::object());
    k.form = kernel_form(kj.value("form", std::string("constant")));
    k.base = kj.value("base", 1.0);
    k.amp = kj.value("amp", 0.0);
    k.freq = kj.value("freq", 1.0);
    k.beta = kj.value("beta", 0.5);
    out = stable_like(k);
  } else if (type == "jump_diffusion") {
    JumpDiffusionSpec s;
    s.alpha = j.at("alpha").get<double>();
    s.dim = j.value("dim", 1);
    const json dj = j.value("drift", json{{"form", "zero"}});
    const std::string form = dj.value("form", std::string("zero"));
    if (form == "zero") {
      s.drift.form = DriftField::Form::zero;
    } else if (form == "constant" || form == "cosine") {
      s.drift.form = form == "constant" ? DriftField::Form::constant
                                         : DriftField::Form::cosine;
      s.drift.v = dj.at("v").get<Vec>();
    } else {
      fail("unknown drift form '" + form + "' (zero, constant, cosine)");
    }
    const json mj = j.at("measure");
    if (mj.contains("uniform_mass")) {
      s.measure.uniform = true;
      s.measure.uniform_mass = mj.at("uniform_mass").get<double>();
      s.measure.uniform_amp = mj.value("uniform_amp", 0.0);
    } else {
      for (const auto& a : mj.at("atoms")) {
        SpectralAtom atom{a.at("direction").get<Vec>(), a.at("weight").get<double>()};
        const double n = norm(atom.direction);
        require(n > 0, "spectral atom direction must be nonzero");
        for (auto& v : atom.direction) v /= n;
        s.measure.atoms.push_back(std::move(atom));
        s.measure.atom_amp.push_back(a.value("amp", 0.0));
      }
    }
    out = jump_diffusion(std::move(s));
  } else if (type == "zero") {
    out = zero_process(j.value("dim", 1));
  } else {
    fail("unknown process type '" + type +
         "' (brownian, stable, subordinator, subordinated, stable_like, "
         "jump_diffusion, zero)");
  }
  out.validate();
  return out;
}

ExponentFn levy_exponent(const ProcessSpec& spec) {
  spec.validate();
  return std::visit(
      overloaded{
          [](const BrownianMotion& b) -> ExponentFn {
            const double s2 = b.sigma * b.sigma;
            return [s2](std::span<const double> xi) -> cplx { return 0.5 * s2 * dot(xi, xi); };
          },
          [](const StableLevy& s) -> ExponentFn {
            return [sp = s.spectral](std::span<const double> xi) {
              return eval_stable_exponent(sp, xi);
            };
          },
          [](const Subordinator& s) -> ExponentFn {
            return [rho = s.rho](std::span<const double> xi) {
              return std::pow(cplx(0.0, -xi[0]), rho);
            };
          },
          [](const Subordinated& s) -> ExponentFn {
            auto base = levy_exponent(*s.base);
            return [base, rho = s.rho](std::span<const double> xi) {
              const cplx v = base(xi);
              return v == 0.0 ? cplx(0.0) : std::pow(v, rho);
            };
          },
          [](const StableLike& s) -> ExponentFn {
            require(!s.kernel.depends_on_x(), "state-dependent kernel has no Levy exponent");
            const auto k = s.kernel;
            return [k](std::span<const double> xi) {
              Vec x(k.dim, 0.0);
              return eval_stable_like_symbol(k, x, xi).value;
            };
          },
          [](const JumpDiffusion& jd) -> ExponentFn {
            require(jd.spec.measure.state_free() &&
                        jd.spec.drift.form != DriftField::Form::cosine,
                    "state-dependent jump diffusion has no Levy exponent");
            const auto sp = jd.spec;
            return [sp](std::span<const double> xi) {
              Vec x(sp.dim, 0.0);
              return eval_jump_diffusion_symbol(sp, x, xi);
            };
          },
          [](const ZeroProcess&) -> ExponentFn {
            return [](std::span<const double>) { return cplx(0.0); };
          }},
      spec.family);
}

SymbolFn symbol_for(const ProcessSpec& spec, const QuadratureConfig& quad) {
  spec.validate();
  if (const auto* s = std::get_if<StableLike>(&spec.family)) {
    const auto k = s->kernel;
    return [k, quad](std::span<const double> x, std::span<const double> xi) {
      return eval_stable_like_symbol(k, x, xi, quad).value;
    };
  }
  if (const auto* j = std::get_if<JumpDiffusion>(&spec.family)) {
    const auto sp = j->spec;
    return [sp](std::span<const double> x, std::span<const double> xi) {
      return eval_jump_diffusion_symbol(sp, x, xi);
    };
  }
  require(spec.is_levy(), "process has no symbol");
  auto psi = levy_exponent(spec);
  return [psi](std::span<const double>, std::span<const double> xi) { return psi(xi); };
}

double typical_step_displacement(const ProcessSpec& spec, double dt) {
  require(dt > 0, "dt must be positive");
  return std::visit(
      overloaded{
          [dt](const BrownianMotion& b) { return b.sigma * std::sqrt(b.dim * dt); },
          [dt](const StableLevy& s) {
            const double m = s.spectral.measure.total_mass();
            double drift = 0.0;
            if (!s.spectral.shift.empty()) drift = norm(s.spectral.shift) * dt;
            return std::pow(m * dt, 1.0 / s.spectral.alpha) + drift;
          },
          [dt](const Subordinator& s) { return std::pow(dt, 1.0 / s.rho); },
          [dt](const Subordinated& s) {
            return typical_step_displacement(*s.base, std::pow(dt, 1.0 / s.rho));
          },
          [dt](const StableLike& s) {
            const double c = s.kernel.kappa1() *
                             isotropic_density_constant(s.kernel.dim, s.kernel.alpha);
            return std::pow(c * dt, 1.0 / s.kernel.alpha);
          },
          [dt](const JumpDiffusion& j) {
            const double m = j.spec.measure.uniform
                                 ? j.spec.measure.uniform_mass + j.spec.measure.uniform_amp
                                 : [&] {
                                     double t = 0.0;
                                     for (std::size_t k = 0; k < j.spec.measure.atoms.size(); ++k) {
                                       t += j.spec.measure.atoms[k].weight;
                                       if (!j.spec.measure.atom_amp.empty())
                                         t += j.spec.measure.atom_amp[k];
                                     }
                                     return t;
                                   }();
            return std::pow(m * dt, 1.0 / j.spec.alpha) + j.spec.drift.sup_norm() * dt;
          },
          [](const ZeroProcess&) { return 0.0; }},
      spec.family);
}

}  // namespace mdim
