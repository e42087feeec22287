#include <smkl/kernels.hpp>

#include <smkl/data_io.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace smkl {

KernelKind KernelKind::gaussian(double t) {
  KernelKind k;
  k.family = KernelFamily::gaussian;
  k.t = t;
  return k;
}

KernelKind KernelKind::linear() {
  KernelKind k;
  k.family = KernelFamily::linear;
  return k;
}

KernelKind KernelKind::polynomial(double a, int b) {
  KernelKind k;
  k.family = KernelFamily::polynomial;
  k.a = a;
  k.b = b;
  return k;
}

std::string KernelKind::name() const {
  char buf[64];
  switch (family) {
    case KernelFamily::gaussian:
      std::snprintf(buf, sizeof(buf), "gaussian(t=%g)", t);
      return buf;
    case KernelFamily::linear:
      return "linear";
    case KernelFamily::polynomial:
      std::snprintf(buf, sizeof(buf), "polynomial(a=%g,b=%d)", a, b);
      return buf;
  }
  throw Error("domain", "KernelKind::name: invalid family");
}

KernelKind KernelKind::parse(const std::string& text) {
  const std::string t = trim_copy(text);
  if (t == "linear") return linear();
  double v = 0;
  if (std::sscanf(t.c_str(), "gaussian(t=%lf)", &v) == 1) return gaussian(v);
  int deg = 0;
  if (std::sscanf(t.c_str(), "polynomial(a=%lf,b=%d)", &v, &deg) == 2)
    return polynomial(v, deg);
  throw Error("parse", "KernelKind::parse: unrecognized kind '" + t + "'");
}

std::vector<KernelKind> recipe_kinds(const std::string& recipe) {
  std::vector<KernelKind> kinds;
  if (recipe == "clustering12") {
    for (double t : {0.01, 0.05, 0.1, 1.0, 10.0, 50.0, 100.0})
      kinds.push_back(KernelKind::gaussian(t));
    kinds.push_back(KernelKind::linear());
    for (double a : {0.0, 1.0})
      for (int b : {2, 4}) kinds.push_back(KernelKind::polynomial(a, b));
  } else if (recipe == "ssl7") {
    for (double t : {0.1, 1.0, 10.0, 100.0})
      kinds.push_back(KernelKind::gaussian(t));
    kinds.push_back(KernelKind::linear());
    for (double a : {0.0, 1.0}) kinds.push_back(KernelKind::polynomial(a, 2));
  } else {
    throw Error("domain", "build_bank: unknown recipe '" + recipe + "'");
  }
  return kinds;
}

KernelBank build_bank(const Matrix& x, const std::string& recipe) {
  return build_bank(x, recipe_kinds(recipe), recipe);
}

KernelBank build_bank(const Matrix& x, const std::vector<KernelKind>& kinds,
                      std::string recipe_name) {
  if (x.rows() < 2)
    throw Error("domain", "build_bank: need at least 2 samples");
  if (kinds.empty()) throw Error("domain", "build_bank: empty kernel list");
  bool needs_dists = false;
  for (const auto& kind : kinds)
    if (kind.family == KernelFamily::gaussian) needs_dists = true;
  SqDists<double> sq;
  if (needs_dists) sq = pairwise_sq_dists(x);

  KernelBank bank;
  bank.recipe = std::move(recipe_name);
  bank.kernels.reserve(kinds.size());
  for (const auto& kind : kinds) {
    Matrix h;
    switch (kind.family) {
      case KernelFamily::gaussian:
        h = gaussian_kernel(sq.d2, sq.dmax2, kind.t);
        break;
      case KernelFamily::linear:
        h = linear_kernel(x);
        break;
      case KernelFamily::polynomial:
        h = polynomial_kernel(x, kind.a, kind.b);
        break;
    }
    bank.kernels.push_back({rescale_kernel(h), kind});
  }
  return bank;
}

namespace {

std::string member_file(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "kernel_%02d.csv", index);
  return buf;
}

}  // namespace

void save_bank(const KernelBank& bank, const std::string& dir) {
  if (bank.kernels.empty()) throw Error("domain", "save_bank: empty bank");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path base(dir);
  std::ofstream manifest(base / "manifest.txt");
  if (!manifest)
    throw Error("io", "save_bank: cannot open manifest in '" + dir + "'");
  manifest << "recipe=" << bank.recipe << '\n';
  for (int i = 0; i < bank.size(); ++i) {
    manifest << bank.kernels[i].kind.name() << '\n';
    save_dense_matrix((base / member_file(i)).string(),
                      bank.kernels[i].values);
  }
  if (!manifest) throw Error("io", "save_bank: manifest write failed");
}

KernelBank load_bank(const std::string& dir) {
  const std::filesystem::path base(dir);
  const auto lines = read_text_lines((base / "manifest.txt").string(),
                                     "load_bank");
  if (lines.empty() || lines[0].rfind("recipe=", 0) != 0)
    throw Error("parse", "load_bank: manifest must start with 'recipe='");
  KernelBank bank;
  bank.recipe = trim_copy(lines[0].substr(7));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim_copy(lines[i]).empty()) continue;
    KernelMatrix member;
    member.kind = KernelKind::parse(lines[i]);
    member.values =
        load_dense_matrix((base / member_file(static_cast<int>(i) - 1)).string())
            .values;
    if (member.values.rows() != member.values.cols())
      throw Error("domain", "load_bank: member " + std::to_string(i - 1) +
                                " is not square");
    if (!bank.kernels.empty() && member.values.rows() != bank.n())
      throw Error("domain", "load_bank: inconsistent member sizes");
    bank.kernels.push_back(std::move(member));
  }
  if (bank.kernels.empty()) throw Error("parse", "load_bank: no members listed");
  return bank;
}

}  // namespace smkl
