#ifndef GGS_NN_HPP
#define GGS_NN_HPP

#include <memory>
#include <vector>

#include "ggs/rng.hpp"
#include "ggs/tensor.hpp"

namespace ggs {

/// One learnable buffer and its gradient accumulator.
struct Param {
    std::vector<double> value;
    std::vector<double> grad;

    void resize(std::size_t n) {
        value.assign(n, 0.0);
        grad.assign(n, 0.0);
    }
    void zero_grad() { grad.assign(grad.size(), 0.0); }
};

/// Stack of activations saved by forward passes and consumed, in reverse,
/// by the matching backward passes. One tape per view pass.
class Tape {
public:
    void push(Tensor t) { stack_.push_back(std::move(t)); }
    Tensor pop() {
        if (stack_.empty()) throw UsageError("backward without a matching forward pass");
        Tensor t = std::move(stack_.back());
        stack_.pop_back();
        return t;
    }
    bool empty() const { return stack_.empty(); }
    void clear() { stack_.clear(); }

private:
    std::vector<Tensor> stack_;
};

class Layer {
public:
    virtual ~Layer() = default;
    /// tape == nullptr runs inference only (nothing saved for backward).
    virtual Tensor forward(const Tensor& in, Tape* tape) = 0;
    /// Returns d(in). Accumulates parameter gradients when accumulate is set;
    /// when need_dinput is false the returned tensor may be empty.
    virtual Tensor backward(const Tensor& d_out, Tape& tape, bool accumulate,
                            bool need_dinput) = 0;
    virtual std::vector<Param*> params() { return {}; }
    virtual void init(Rng& rng) { (void)rng; }
};

class Conv2d final : public Layer {
public:
    Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad, bool bias = true);

    Tensor forward(const Tensor& in, Tape* tape) override;
    Tensor backward(const Tensor& d_out, Tape& tape, bool accumulate, bool need_dinput) override;
    std::vector<Param*> params() override;
    void init(Rng& rng) override;

    int out_height(int in_h) const { return (in_h + 2 * pad_ - ksize_) / stride_ + 1; }
    int out_width(int in_w) const { return (in_w + 2 * pad_ - ksize_) / stride_ + 1; }

private:
    int in_ch_, out_ch_, ksize_, stride_, pad_;
    bool has_bias_;
    Param weight_; // [oc][ic][ky][kx]
    Param bias_;
};

class ReLU final : public Layer {
public:
    Tensor forward(const Tensor& in, Tape* tape) override;
    Tensor backward(const Tensor& d_out, Tape& tape, bool accumulate, bool need_dinput) override;
};

/// conv-relu-conv with an identity skip and a trailing relu. Channel count
/// and spatial size are preserved.
class ResidualBlock final : public Layer {
public:
    ResidualBlock(int channels, bool bias = true);

    Tensor forward(const Tensor& in, Tape* tape) override;
    Tensor backward(const Tensor& d_out, Tape& tape, bool accumulate, bool need_dinput) override;
    std::vector<Param*> params() override;
    void init(Rng& rng) override;

private:
    Conv2d conv1_, conv2_;
    ReLU relu_;
};

/// Fully connected layer on flat vectors (stored as 1 x 1 x n tensors
/// when passing through the Layer interface is not needed).
class Linear final {
public:
    Linear(int in_dim, int out_dim);

    std::vector<double> forward(const std::vector<double>& in,
                                std::vector<std::vector<double>>* saved);
    std::vector<double> backward(const std::vector<double>& d_out,
                                 std::vector<std::vector<double>>& saved, bool accumulate);
    std::vector<Param*> params() { return {&weight_, &bias_}; }
    void init(Rng& rng);

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }

private:
    int in_dim_, out_dim_;
    Param weight_; // [out][in]
    Param bias_;
};

} // namespace ggs

#endif
