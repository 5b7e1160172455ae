#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dggan/core/tensor.hpp"

namespace dggan::nn {

struct Param {
  Tensor value;
  Tensor grad;

  explicit Param(Tensor v) : value(std::move(v)) { grad = Tensor::zeros(value.shape()); }
  Param() = default;
};

using NamedParams = std::vector<std::pair<std::string, Param*>>;

// Layers cache whatever they need during forward; backward consumes the cache
// of the most recent forward and accumulates parameter gradients. One
// forward/backward pair in flight per module instance.
class Module {
 public:
  virtual ~Module() = default;
  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void collect(const std::string& prefix, NamedParams& out) = 0;

  std::vector<Param*> parameters() {
    NamedParams named;
    collect("", named);
    std::vector<Param*> out;
    out.reserve(named.size());
    for (auto& [name, p] : named) out.push_back(p);
    return out;
  }

  void zero_grad() {
    for (Param* p : parameters()) p->grad.zero_();
  }
};

class Sequential : public Module {
 public:
  Sequential() = default;

  template <typename T, typename... Args>
  T* emplace(std::string name, Args&&... args) {
    auto m = std::make_unique<T>(std::forward<Args>(args)...);
    T* raw = m.get();
    names_.push_back(std::move(name));
    modules_.push_back(std::move(m));
    return raw;
  }

  Tensor forward(const Tensor& x) override {
    Tensor cur = x;
    for (auto& m : modules_) cur = m->forward(cur);
    return cur;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor cur = grad_out;
    for (auto it = modules_.rbegin(); it != modules_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
  }

  void collect(const std::string& prefix, NamedParams& out) override {
    for (std::size_t i = 0; i < modules_.size(); ++i) {
      const std::string p = prefix.empty() ? names_[i] : prefix + "." + names_[i];
      modules_[i]->collect(p, out);
    }
  }

  std::size_t size() const { return modules_.size(); }
  Module& at(std::size_t i) { return *modules_[i]; }

 private:
  std::vector<std::string> names_;
  std::vector<std::unique_ptr<Module>> modules_;
};

}  // namespace dggan::nn
