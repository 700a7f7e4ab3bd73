#include "fbpinn/tape.hpp"

#include <cstring>

namespace fbpinn {

const double* tape_forward(const TapeProgram& prog, std::span<const double> params,
                           TapeWorkspace& ws) {
  const int d = prog.dim();
  const int W = prog.width();
  const auto& nodes = prog.nodes();
  const auto& args = prog.args();
  const auto& payload = prog.payload();

  if (ws.jets.size() < nodes.size() * static_cast<size_t>(W)) {
    ws.jets.resize(nodes.size() * static_cast<size_t>(W));
  }
  double* jets = ws.jets.data();

  for (size_t n = 0; n < nodes.size(); ++n) {
    const TapeNode& node = nodes[n];
    double* out = jets + n * static_cast<size_t>(W);
    switch (node.op) {
      case TapeOp::ConstJet:
        std::memcpy(out, payload.data() + node.a, sizeof(double) * static_cast<size_t>(W));
        break;
      case TapeOp::Param:
        jk_const(out, params[node.a], d);
        break;
      case TapeOp::Add:
        jk_add(out, jets + node.a * static_cast<size_t>(W), jets + node.b * static_cast<size_t>(W), d);
        break;
      case TapeOp::Sub:
        jk_sub(out, jets + node.a * static_cast<size_t>(W), jets + node.b * static_cast<size_t>(W), d);
        break;
      case TapeOp::Mul:
        jk_mul(out, jets + node.a * static_cast<size_t>(W), jets + node.b * static_cast<size_t>(W), d);
        break;
      case TapeOp::Neg:
        jk_neg(out, jets + node.a * static_cast<size_t>(W), d);
        break;
      case TapeOp::Recip:
        jk_recip(out, jets + node.a * static_cast<size_t>(W), d);
        break;
      case TapeOp::Tanh:
        jk_tanh(out, jets + node.a * static_cast<size_t>(W), d);
        break;
      case TapeOp::Sin:
        jk_sin(out, jets + node.a * static_cast<size_t>(W), d);
        break;
      case TapeOp::Cos:
        jk_cos(out, jets + node.a * static_cast<size_t>(W), d);
        break;
      case TapeOp::Exp:
        jk_exp(out, jets + node.a * static_cast<size_t>(W), d);
        break;
      case TapeOp::ScaleShift:
        jk_scale_shift(out, jets + node.a * static_cast<size_t>(W), payload[node.b],
                       payload[node.b + 1], d);
        break;
      case TapeOp::Affine: {
        const uint32_t* arg = args.data() + node.a;
        jk_const(out, params[arg[0]], d);
        for (uint32_t k = 0; k < node.b; ++k) {
          const double w = params[arg[1 + 2 * k]];
          const double* x = jets + arg[2 + 2 * k] * static_cast<size_t>(W);
          for (int i = 0; i < W; ++i) out[i] += w * x[i];
        }
        break;
      }
    }
  }
  return jets + (nodes.size() - 1) * static_cast<size_t>(W);
}

namespace {

// adjoint of y = f(a) through all jet channels, given f', f'', f''' at a
inline void reverse_chain(double* A, const double* Y, const double* aj, double f1, double f2,
                          double f3, int d) {
  A[0] += Y[0] * f1;
  for (int i = 0; i < d; ++i) {
    const double ag = aj[1 + i];
    const double ah = aj[1 + d + i];
    const double Yg = Y[1 + i];
    const double Yh = Y[1 + d + i];
    A[0] += Yg * (f2 * ag) + Yh * (f3 * (ag * ag) + f2 * ah);
    A[1 + i] += Yg * f1 + Yh * (2.0 * f2 * ag);
    A[1 + d + i] += Yh * f1;
  }
}

}  // namespace

void tape_reverse(const TapeProgram& prog, std::span<const double> params,
                  std::span<const double> seed, TapeWorkspace& ws, std::span<double> grad) {
  const int d = prog.dim();
  const int W = prog.width();
  const auto& nodes = prog.nodes();
  const auto& args = prog.args();
  const size_t total = nodes.size() * static_cast<size_t>(W);

  if (ws.adjoints.size() < total) ws.adjoints.resize(total);
  std::memset(ws.adjoints.data(), 0, sizeof(double) * total);

  const double* jets = ws.jets.data();
  double* adj = ws.adjoints.data();
  std::memcpy(adj + (nodes.size() - 1) * static_cast<size_t>(W), seed.data(),
              sizeof(double) * static_cast<size_t>(W));

  for (size_t n = nodes.size(); n-- > 0;) {
    const TapeNode& node = nodes[n];
    const double* Y = adj + n * static_cast<size_t>(W);
    switch (node.op) {
      case TapeOp::ConstJet:
        break;
      case TapeOp::Param:
        grad[node.a] += Y[0];
        break;
      case TapeOp::Add: {
        double* A = adj + node.a * static_cast<size_t>(W);
        double* B = adj + node.b * static_cast<size_t>(W);
        for (int i = 0; i < W; ++i) A[i] += Y[i];
        for (int i = 0; i < W; ++i) B[i] += Y[i];
        break;
      }
      case TapeOp::Sub: {
        double* A = adj + node.a * static_cast<size_t>(W);
        double* B = adj + node.b * static_cast<size_t>(W);
        for (int i = 0; i < W; ++i) A[i] += Y[i];
        for (int i = 0; i < W; ++i) B[i] -= Y[i];
        break;
      }
      case TapeOp::Neg: {
        double* A = adj + node.a * static_cast<size_t>(W);
        for (int i = 0; i < W; ++i) A[i] -= Y[i];
        break;
      }
      case TapeOp::Mul: {
        const double* aj = jets + node.a * static_cast<size_t>(W);
        const double* bj = jets + node.b * static_cast<size_t>(W);
        double* A = adj + node.a * static_cast<size_t>(W);
        double* B = adj + node.b * static_cast<size_t>(W);
        const double av = aj[0], bv = bj[0];
        A[0] += Y[0] * bv;
        B[0] += Y[0] * av;
        for (int i = 0; i < d; ++i) {
          const double Yg = Y[1 + i];
          const double Yh = Y[1 + d + i];
          const double ag = aj[1 + i], ah = aj[1 + d + i];
          const double bg = bj[1 + i], bh = bj[1 + d + i];
          A[1 + i] += Yg * bv + Yh * (2.0 * bg);
          A[0] += Yg * bg + Yh * bh;
          A[1 + d + i] += Yh * bv;
          B[1 + i] += Yg * av + Yh * (2.0 * ag);
          B[0] += Yg * ag + Yh * ah;
          B[1 + d + i] += Yh * av;
        }
        break;
      }
      case TapeOp::Recip: {
        const double* aj = jets + node.a * static_cast<size_t>(W);
        const double r = jets[n * static_cast<size_t>(W)];  // 1/a
        const double f1 = -r * r;
        const double f2 = 2.0 * r * r * r;
        const double f3 = -6.0 * r * r * r * r;
        reverse_chain(adj + node.a * static_cast<size_t>(W), Y, aj, f1, f2, f3, d);
        break;
      }
      case TapeOp::Tanh: {
        const double* aj = jets + node.a * static_cast<size_t>(W);
        const double t = jets[n * static_cast<size_t>(W)];
        const double s = 1.0 - t * t;
        reverse_chain(adj + node.a * static_cast<size_t>(W), Y, aj, s, -2.0 * t * s,
                      s * (6.0 * t * t - 2.0), d);
        break;
      }
      case TapeOp::Sin: {
        const double* aj = jets + node.a * static_cast<size_t>(W);
        const double s = jets[n * static_cast<size_t>(W)];
        const double c = std::cos(aj[0]);
        reverse_chain(adj + node.a * static_cast<size_t>(W), Y, aj, c, -s, -c, d);
        break;
      }
      case TapeOp::Cos: {
        const double* aj = jets + node.a * static_cast<size_t>(W);
        const double c = jets[n * static_cast<size_t>(W)];
        const double s = std::sin(aj[0]);
        reverse_chain(adj + node.a * static_cast<size_t>(W), Y, aj, -s, -c, s, d);
        break;
      }
      case TapeOp::Exp: {
        const double* aj = jets + node.a * static_cast<size_t>(W);
        const double e = jets[n * static_cast<size_t>(W)];
        reverse_chain(adj + node.a * static_cast<size_t>(W), Y, aj, e, e, e, d);
        break;
      }
      case TapeOp::ScaleShift: {
        const double s = prog.payload()[node.b];
        double* A = adj + node.a * static_cast<size_t>(W);
        for (int i = 0; i < W; ++i) A[i] += s * Y[i];
        break;
      }
      case TapeOp::Affine: {
        const uint32_t* arg = args.data() + node.a;
        grad[arg[0]] += Y[0];
        for (uint32_t k = 0; k < node.b; ++k) {
          const uint32_t w_slot = arg[1 + 2 * k];
          const uint32_t x_node = arg[2 + 2 * k];
          const double w = params[w_slot];
          const double* xj = jets + x_node * static_cast<size_t>(W);
          double* X = adj + x_node * static_cast<size_t>(W);
          double gw = Y[0] * xj[0];
          for (int i = 1; i < W; ++i) gw += Y[i] * xj[i];
          grad[w_slot] += gw;
          for (int i = 0; i < W; ++i) X[i] += w * Y[i];
        }
        break;
      }
    }
  }
}

DualValue tape_eval(const TapeProgram& prog, std::span<const double> params) {
  TapeWorkspace ws;
  const double* out = tape_forward(prog, params, ws);
  Jet j(prog.dim());
  jk_copy(j.data(), out, prog.dim());
  return to_dual(j);
}

double tape_value_and_grad(const TapeProgram& prog, std::span<const double> params,
                           std::span<double> grad) {
  TapeWorkspace ws;
  const double* out = tape_forward(prog, params, ws);
  const double value = out[0];
  std::vector<double> seed(static_cast<size_t>(prog.width()), 0.0);
  seed[0] = 1.0;
  tape_reverse(prog, params, seed, ws, grad);
  return value;
}

}  // namespace fbpinn
