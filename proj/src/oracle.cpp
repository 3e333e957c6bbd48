#include "mmvm/oracle.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <stdexcept>

#include "mmvm/stdlib.hpp"

namespace mmvm::oracle {

std::unique_ptr<DenseModel> build_dense_model(const Program& program, std::size_t capacity) {
  validate_program(program);
  auto model = std::make_unique<DenseModel>();
  model->program = program;
  const Signature& sig = model->program.signature;

  // Breadth-first closure: an output pulls in its ports, an input pulls in
  // its owner (and through it the sibling ports).
  std::set<std::string> seen;
  std::deque<std::string> queue;
  auto push = [&](const std::string& name) {
    if (seen.insert(name).second) {
      if (seen.size() > capacity) {
        throw std::length_error("dense model exceeds capacity of " + std::to_string(capacity) + " nodes");
      }
      queue.push_back(name);
    }
  };
  model->program.matrix.for_each([&](const std::string& c, const std::string& r, const ElementSource& s) {
    push(c);
    push(r);
    if (const auto* n = std::get_if<NodeSource>(&s)) push(n->node);
  });
  for (const auto& group : model->program.shared_input_groups) {
    for (const auto& name : group) push(name);
  }
  while (!queue.empty()) {
    std::string name = queue.front();
    queue.pop_front();
    NodeName n = require_node(name, sig);
    if (n.is_input()) {
      push(n.owner());
    } else {
      for (int k = 1; k <= sig.find(n.op)->arity; ++k) push(input_node_name(sig, n.raw, k).raw);
    }
  }

  std::map<std::string, std::size_t> x_index, y_index;
  for (const auto& name : seen) {
    if (name.starts_with("arg")) {
      y_index[name] = model->y_names.size();
      model->y_names.push_back(name);
    } else {
      x_index[name] = model->x_names.size();
      model->x_names.push_back(name);
    }
  }
  for (const auto& name : model->x_names) {
    NodeName n = require_output(name, sig);
    const OperationDef* op = sig.find(n.op);
    model->x_ops.push_back(op);
    std::vector<std::size_t> ports;
    for (int k = 1; k <= op->arity; ++k) ports.push_back(y_index.at(input_node_name(sig, name, k).raw));
    model->x_ports.push_back(std::move(ports));
  }

  for (const auto& name : model->y_names) model->y_owner.push_back(x_index.at(require_input(name, sig).owner()));

  const std::size_t nx = model->x_names.size();
  model->sources.assign(model->y_names.size(), std::vector<const ElementSource*>(nx, nullptr));
  model->source_index.assign(model->y_names.size(), std::vector<std::size_t>(nx, 0));
  for (std::size_t j = 0; j < model->y_names.size(); ++j) {
    const auto* col = model->program.matrix.column(model->y_names[j]);
    if (col == nullptr) continue;
    for (const auto& [row, source] : *col) {
      std::size_t i = x_index.at(row);
      model->sources[j][i] = &source;
      if (const auto* n = std::get_if<NodeSource>(&source)) {
        model->source_index[j][i] = x_index.at(n->node);
        model->source_targets.push_back(x_index.at(n->node));
      }
    }
  }
  return model;
}

Matrix dense_coefficients(const DenseModel& model, const Vector& x, std::int64_t t) {
  const std::size_t ny = model.y_names.size();
  const std::size_t nx = model.x_names.size();
  const Program& p = model.program;
  Matrix L(ny, Vector(nx, 0.0));
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const ElementSource* s = model.sources[j][i];
      if (s == nullptr) continue;
      if (const auto* c = std::get_if<ConstantSource>(s)) {
        L[j][i] = c->value;
      } else if (const auto* e = std::get_if<ExternalSource>(s)) {
        L[j][i] = e->schedule.value(t);
      } else {
        L[j][i] = x[model.source_index[j][i]];
      }
    }
    if (p.policy == Policy::free) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      if (L[j][i] < 0.0 || std::isnan(L[j][i])) {
        if (p.violation_mode == ViolationMode::reject) {
          throw std::runtime_error("oracle: negative coefficient in column '" + model.y_names[j] + "'");
        }
        L[j][i] = 0.0;
      }
      sum += L[j][i];
    }
    if (p.policy == Policy::substochastic && sum > 1.0 + kColumnSumEpsilon) {
      if (p.violation_mode == ViolationMode::reject) {
        throw std::runtime_error("oracle: column sum above 1 in '" + model.y_names[j] + "'");
      }
      for (std::size_t i = 0; i < nx; ++i) L[j][i] /= sum;
    }
  }
  return L;
}

std::pair<Vector, Vector> dense_step(const DenseModel& model, const Vector& x, const Vector& y,
                                     std::int64_t t) {
  if (x.size() != model.x_names.size() || y.size() != model.y_names.size()) {
    throw std::invalid_argument("dense_step: dimension mismatch");
  }
  const std::int64_t next = t + 1;
  Vector x_next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vector args;
    for (std::size_t port : model.x_ports[i]) args.push_back(y[port]);
    auto rng = RngContext::for_node(model.program.seed, model.x_names[i], next);
    x_next[i] = eval_operation(*model.x_ops[i], args, rng);
  }
  Matrix L = dense_coefficients(model, x_next, next);
  Vector y_next(y.size(), 0.0);
  for (std::size_t j = 0; j < y.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x_next.size(); ++i) sum += L[j][i] * x_next[i];
    y_next[j] = sum;
  }
  return {std::move(x_next), std::move(y_next)};
}

void mark_reached(const DenseModel& model, const Matrix& L, std::vector<bool>& reached) {
  for (std::size_t i : model.source_targets) reached[i] = true;
  for (std::size_t j = 0; j < L.size(); ++j) {
    for (std::size_t i = 0; i < L[j].size(); ++i) {
      if (L[j][i] != 0.0) {
        reached[i] = true;
        reached[model.y_owner[j]] = true;
      }
    }
  }
}

Trajectory dense_run(const Program& program, std::int64_t horizon, const std::vector<std::string>& watch) {
  auto model = build_dense_model(program);
  // (is_output, index) per watched name; unknown names read 0.
  std::vector<std::pair<int, std::size_t>> where;
  for (const auto& w : watch) {
    require_node(w, program.signature);
    auto find = [&](const std::vector<std::string>& v) -> std::optional<std::size_t> {
      auto it = std::lower_bound(v.begin(), v.end(), w);
      if (it == v.end() || *it != w) return std::nullopt;
      return static_cast<std::size_t>(it - v.begin());
    };
    if (auto i = find(model->x_names)) {
      where.emplace_back(1, *i);
    } else if (auto j = find(model->y_names)) {
      where.emplace_back(0, *j);
    } else {
      where.emplace_back(-1, 0);
    }
  }
  Vector x(model->x_names.size(), 0.0);
  Vector y(model->y_names.size(), 0.0);
  std::vector<bool> reached(x.size(), false);
  mark_reached(*model, dense_coefficients(*model, x, 0), reached);
  Trajectory traj;
  traj.nodes = watch;
  auto record = [&] {
    Vector row;
    for (auto [kind, idx] : where) {
      row.push_back(kind == 1 ? (reached[idx] ? x[idx] : 0.0) : kind == 0 ? y[idx] : 0.0);
    }
    traj.values.push_back(std::move(row));
  };
  record();
  for (std::int64_t t = 0; t < horizon; ++t) {
    auto [xn, yn] = dense_step(*model, x, y, t);
    x = std::move(xn);
    y = std::move(yn);
    mark_reached(*model, dense_coefficients(*model, x, t + 1), reached);
    record();
  }
  return traj;
}

Report compare_trajectories(const Trajectory& sparse, const Trajectory& dense, double tol) {
  if (sparse.nodes != dense.nodes || sparse.values.size() != dense.values.size()) {
    throw std::invalid_argument("compare_trajectories: trajectories have different shapes");
  }
  Report r;
  r.nodes = sparse.nodes;
  r.max_deviation.assign(sparse.nodes.size(), 0.0);
  for (std::size_t t = 0; t < sparse.values.size(); ++t) {
    if (sparse.values[t].size() != dense.values[t].size()) {
      throw std::invalid_argument("compare_trajectories: ragged trajectory");
    }
    for (std::size_t k = 0; k < sparse.nodes.size(); ++k) {
      double a = sparse.values[t][k];
      double b = dense.values[t][k];
      double d = (a == b) ? 0.0 : std::abs(a - b);
      if (std::isnan(d)) d = std::numeric_limits<double>::infinity();
      r.max_deviation[k] = std::max(r.max_deviation[k], d);
      r.overall = std::max(r.overall, d);
      if (d > tol && !r.first) r.first = Divergence{static_cast<std::int64_t>(t), sparse.nodes[k], d};
    }
  }
  r.pass = !r.first.has_value();
  return r;
}

}  // namespace mmvm::oracle
