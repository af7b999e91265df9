#include "lorhol/constructions.hpp"

#include <cmath>

namespace lorhol {

TwoForm::TwoForm(int k, int n) : k_(k), n_(n), comps_(static_cast<std::size_t>(k) * k, ScalarField(n)) {
  if (k < 0) throw ValidationError("form size must be non-negative");
}

TwoForm TwoForm::constant(const Matrix& values, int n) {
  const int k = static_cast<int>(values.rows());
  if (values.cols() != k) throw ValidationError("two-form must be square");
  if ((values + values.transpose()).cwiseAbs().maxCoeff() > 0.0) throw ValidationError("two-form must be antisymmetric");
  TwoForm w(k, n);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (values(i, j) != 0.0) w.set(i, j, ScalarField::constant(n, values(i, j)));
  return w;
}

void TwoForm::set(int i, int j, const ScalarField& value) {
  if (i < 0 || j < 0 || i >= k_ || j >= k_) throw DomainError("two-form index out of range");
  if (i == j) throw ValidationError("diagonal of a two-form is zero");
  if (value.screen_dim() != n_) throw ValidationError("component defined for another chart dimension");
  comps_[static_cast<std::size_t>(i) * k_ + j] = value;
  comps_[static_cast<std::size_t>(j) * k_ + i] = -value;
}

const ScalarField& TwoForm::component(int i, int j) const {
  if (i < 0 || j < 0 || i >= k_ || j >= k_) throw DomainError("two-form index out of range");
  return comps_[static_cast<std::size_t>(i) * k_ + j];
}

Matrix TwoForm::at(const Point& p) const {
  Matrix out = Matrix::Zero(k_, k_);
  for (int i = 0; i < k_; ++i)
    for (int j = i + 1; j < k_; ++j) {
      out(i, j) = component(i, j).eval(p);
      out(j, i) = -out(i, j);
    }
  return out;
}

namespace {

bool is_zero(const ScalarField& s) {
  const auto c = s.constant_value();
  return c && *c == 0.0;
}

ScalarField sum_nonzero(std::initializer_list<ScalarField> terms, int n) {
  std::optional<ScalarField> acc;
  for (const auto& t : terms) {
    if (is_zero(t)) continue;
    acc = acc ? *acc + t : t;
  }
  return acc ? *acc : ScalarField(n);
}

std::vector<std::vector<ScalarField>> identity_block(int n) {
  std::vector<std::vector<ScalarField>> G(n, std::vector<ScalarField>(n, ScalarField(n)));
  for (int a = 0; a < n; ++a) G[a][a] = ScalarField::constant(n, 1.0);
  return G;
}

}  // namespace

Construction toric_flat_torus(int n, const std::vector<ScalarField>& phi, const ScalarField& f, double c_zz,
                              std::optional<TwoForm> psi) {
  if (n < 1) throw ValidationError("toric charts need n >= 1");
  if (static_cast<int>(phi.size()) != n + 1) throw ValidationError("potential needs n + 1 components");
  for (const auto& c : phi)
    if (c.screen_dim() != n || c.depends_on(0)) throw ValidationError("potential must live on (y, z)");
  if (psi && (psi->size() != n + 1 || psi->chart_screen_dim() != n))
    throw ValidationError("two-form must have size n + 1");
  const int m = n + 2;
  std::vector<ScalarField> u;
  for (int i = 0; i < n; ++i) u.push_back(is_zero(phi[i]) ? ScalarField(n) : 2.0 * phi[i]);
  const ScalarField czz = c_zz == 0.0 ? ScalarField(n) : ScalarField::constant(n, c_zz);
  const ScalarField ftotal = sum_nonzero({phi[n], f, czz}, n);

  Construction c;
  c.chart = assemble_walker(n, ftotal, u, identity_block(n), Box::cube(m, 0.0, 1.0));
  c.base_point = c.chart.domain().center();
  c.f = f;
  c.phi = phi;
  c.psi = std::move(psi);
  return c;
}

Construction example51(int n, double cval, const ScalarField& f) {
  if (n < 2) throw ValidationError("the c dy1 ^ dy2 bundle needs n >= 2");
  std::vector<ScalarField> phi(n + 1, ScalarField(n));
  phi[1] = cval * ScalarField::coordinate(n, 1);
  TwoForm psi(n + 1, n);
  psi.set(0, 1, ScalarField::constant(n, cval));
  Construction c = toric_flat_torus(n, phi, f, 0.0, psi);
  c.name = "example51";
  return c;
}

Construction corollary_ppwave(int n, const ScalarField& f) {
  std::vector<ScalarField> phi(n + 1, ScalarField(n));
  phi[n] = ScalarField::coordinate(n, 1);
  TwoForm psi(n + 1, n);
  psi.set(0, n, ScalarField::constant(n, 1.0));
  Construction c = toric_flat_torus(n, phi, f, 1.0, psi);
  c.name = "corollary";
  c.periodic_part = f;
  return c;
}

Construction example52(const ScalarField& f) {
  if (f.screen_dim() != 1) throw ValidationError("example52 lives on a chart with n = 1");
  Construction c = corollary_ppwave(1, f);
  c.name = "example52";
  return c;
}

std::pair<ScalarField, ScalarField> bump_pair(int n) {
  const ScalarField f1 = parse_expression("sstep(-2*z - 1)", n);
  const ScalarField f2 = parse_expression("sstep(2*z - 1)", n);
  return {f1, f2};
}

Construction footnote_counterexample() {
  const int n = 1;
  const auto [f1, f2] = bump_pair(n);
  const ScalarField y2 = ScalarField::coordinate(n, 1).pow(2);
  const ScalarField zero(n);
  const ScalarField one = ScalarField::constant(n, 1.0);
  const ScalarField gxx = y2 * f2;
  const ScalarField gzz = y2 * f1;
  std::vector<std::vector<ScalarField>> e = {{gxx, zero, one}, {zero, one, zero}, {one, zero, gzz}};
  Construction c;
  c.name = "footnote";
  c.chart = assemble_general(n, e);
  Box box;
  box.lo = Vector(3);
  box.hi = Vector(3);
  box.lo << -1.0, -1.0, -2.0;
  box.hi << 1.0, 1.0, 2.0;
  c.chart.set_domain(box);
  c.base_point = Point(3);
  c.base_point << 0.0, 0.5, 0.0;
  c.f = zero;
  return c;
}

std::pair<ScalarField, ScalarField> sufficiently_generic_default(int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) {
    if (i > 1) s += " + ";
    s += "sin(2*pi*y" + std::to_string(i) + ")*cos(2*pi*" + std::to_string(i) + "*z)";
  }
  const ScalarField f0 = parse_expression(s, n);
  const ScalarField f1 = parse_expression(s + " + sin(2*pi*x)*(1 + cos(2*pi*z))", n);
  return {f0, f1};
}

std::vector<std::string> demo_names() {
  return {"flat", "toric-ppwave", "toric-prwave", "corollary", "footnote", "example52"};
}

Construction demo(const std::string& name) {
  if (name == "flat") {
    const int n = 2;
    Construction c;
    c.name = name;
    c.chart = assemble_walker(n, ScalarField(n), {ScalarField(n), ScalarField(n)}, identity_block(n));
    c.base_point = c.chart.domain().center();
    c.f = ScalarField(n);
    c.periodic_part = ScalarField(n);
    return c;
  }
  if (name == "toric-ppwave" || name == "toric-prwave") {
    const auto [f0, f1] = sufficiently_generic_default(2);
    Construction c = example51(2, 1.0, name == "toric-ppwave" ? f0 : f1);
    c.name = name;
    return c;
  }
  if (name == "corollary") {
    Construction c = corollary_ppwave(2, sufficiently_generic_default(2).first);
    c.name = name;
    return c;
  }
  if (name == "footnote") return footnote_counterexample();
  if (name == "example52") return example52(parse_expression("sin(2*pi*y1)*cos(2*pi*z)", 1));
  throw ValidationError("unknown demo '" + name + "'");
}

double potential_residual(const Construction& c, std::span<const Point> points) {
  if (!c.psi || c.phi.empty()) throw ValidationError("construction has no potential");
  const int k = static_cast<int>(c.phi.size());
  double worst = 0.0;
  for (const auto& p : points) {
    std::vector<Vector> grads;
    for (const auto& ph : c.phi) grads.push_back(ph.jet(p, 1).gradient);
    const Matrix psi = c.psi->at(p);
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        const double d = grads[b][a + 1] - grads[a][b + 1];
        worst = std::max(worst, std::abs(d - psi(a, b)));
      }
  }
  return worst;
}

}  // namespace lorhol
