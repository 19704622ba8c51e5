#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lsnn/common.hpp"
#include "lsnn/geometry.hpp"

namespace lsnn {

/// Layer widths [n0, n1, ..., nL] of a scalar-output ReLU MLP.
/// n0 = 2 (planar input), nL = 1, at least one hidden layer.
struct Architecture {
    std::vector<int> widths;

    Architecture() : widths{2, 1, 1} {}  // minimal placeholder
    explicit Architecture(std::vector<int> w) : widths(std::move(w)) { validate(); }

    void validate() const {
        if (widths.size() < 3)
            throw ShapeError("Architecture: need at least one hidden layer");
        if (widths.front() != 2)
            throw ShapeError("Architecture: input width must be 2");
        if (widths.back() != 1)
            throw ShapeError("Architecture: output width must be 1");
        for (int w : widths)
            if (w < 1) throw ShapeError("Architecture: widths must be positive");
    }

    int depth() const { return static_cast<int>(widths.size()) - 1; }  // affine layers

    /// "2-4-1" spelling used by configs and reports.
    static Architecture parse(const std::string& s) {
        std::vector<int> w;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, '-')) w.push_back(std::stoi(tok));
        return Architecture(std::move(w));
    }
    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < widths.size(); ++i) {
            if (i) s += '-';
            s += std::to_string(widths[i]);
        }
        return s;
    }

    friend bool operator==(const Architecture& a, const Architecture& b) {
        return a.widths == b.widths;
    }
};

/// Flattened length: sum over layers of n_l * (n_{l-1} + 1).
inline long raw_param_count(const Architecture& a) {
    long n = 0;
    for (int l = 1; l <= a.depth(); ++l)
        n += static_cast<long>(a.widths[l]) * (a.widths[l - 1] + 1);
    return n;
}

/// Parameter count with first-layer weight rows counted as unit directions
/// (d - 1 = 1 angle plus one bias per first-layer neuron in 2-D); deeper layers
/// count fully. This is the convention used by the benchmark tables.
inline long effective_param_count(const Architecture& a) {
    long n = static_cast<long>(a.widths[1]) * 2;
    for (int l = 2; l <= a.depth(); ++l)
        n += static_cast<long>(a.widths[l]) * (a.widths[l - 1] + 1);
    return n;
}

/// Weights and biases of the network, stored flattened in layer-major,
/// neuron-major order: for each layer l = 1..L, for each neuron i, the
/// row omega^(l)_i followed by b^(l)_i. Biases are SUBTRACTED in the
/// affine maps: z = omega x - b. That convention holds everywhere,
/// including checkpoints.
struct Parameters {
    Architecture arch;
    std::vector<double> theta;

    Parameters() : Parameters(Architecture()) {}
    explicit Parameters(Architecture a)
        : arch(std::move(a)), theta(raw_param_count(arch), 0.0) {
        build_offsets();
    }

    std::size_t layer_offset(int l) const { return offsets_[l - 1]; }
    int row_stride(int l) const { return arch.widths[l - 1] + 1; }

    double& weight(int l, int i, int j) {
        return theta[layer_offset(l) + static_cast<std::size_t>(i) * row_stride(l) + j];
    }
    double weight(int l, int i, int j) const {
        return theta[layer_offset(l) + static_cast<std::size_t>(i) * row_stride(l) + j];
    }
    double& bias(int l, int i) {
        return theta[layer_offset(l) + static_cast<std::size_t>(i) * row_stride(l) +
                     arch.widths[l - 1]];
    }
    double bias(int l, int i) const {
        return theta[layer_offset(l) + static_cast<std::size_t>(i) * row_stride(l) +
                     arch.widths[l - 1]];
    }

private:
    void build_offsets() {
        offsets_.assign(arch.depth(), 0);
        std::size_t off = 0;
        for (int l = 1; l <= arch.depth(); ++l) {
            offsets_[l - 1] = off;
            off += static_cast<std::size_t>(arch.widths[l]) * (arch.widths[l - 1] + 1);
        }
    }
    std::vector<std::size_t> offsets_;
};

/// Scratch buffers for one forward/backward evaluation. Reused across calls;
/// one instance per thread.
struct EvalWorkspace {
    std::vector<double> act;    // [x(2), a^(1), ..., a^(L-1)] concatenated
    std::vector<double> pre;    // [z^(1), ..., z^(L)] concatenated
    std::vector<double> delta;  // same shape as pre
    std::vector<std::size_t> act_off, pre_off;

    EvalWorkspace() = default;
    explicit EvalWorkspace(const Architecture& a) { bind(a); }

    void bind(const Architecture& a) {
        const int L = a.depth();
        act_off.assign(L, 0);
        pre_off.assign(L, 0);
        std::size_t ao = 2, po = 0;
        for (int l = 1; l <= L; ++l) {
            pre_off[l - 1] = po;
            po += a.widths[l];
            if (l < L) {
                act_off[l - 1] = ao;  // start of a^(l)
                ao += a.widths[l];
            }
        }
        act.assign(ao, 0.0);
        pre.assign(po, 0.0);
        delta.assign(po, 0.0);
    }
};

/// N(x): affine layers with ReLU between them, none on the output.
/// Pre-activations and activations stay in `ws` for a subsequent backward pass.
inline double forward(const Parameters& params, Vec2 x, EvalWorkspace& ws) {
    const Architecture& a = params.arch;
    const int L = a.depth();
    ws.act[0] = x.x;
    ws.act[1] = x.y;
    std::size_t in_off = 0;
    for (int l = 1; l <= L; ++l) {
        const int nin = a.widths[l - 1];
        const int nout = a.widths[l];
        const double* p = params.theta.data() + params.layer_offset(l);
        const double* in = ws.act.data() + in_off;
        double* z = ws.pre.data() + ws.pre_off[l - 1];
        for (int i = 0; i < nout; ++i) {
            const double* row = p + static_cast<std::size_t>(i) * (nin + 1);
            double s = -row[nin];
            for (int j = 0; j < nin; ++j) s += row[j] * in[j];
            z[i] = s;
        }
        if (l < L) {
            double* out = ws.act.data() + ws.act_off[l - 1];
            for (int i = 0; i < nout; ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
            in_off = ws.act_off[l - 1];
        }
    }
    return ws.pre[ws.pre_off[L - 1]];
}

inline double forward(const Parameters& params, Vec2 x) {
    EvalWorkspace ws(params.arch);
    return forward(params, x, ws);
}

/// Accumulates seed * dN/dtheta into grad (flattened layout), reusing the
/// forward state left in `ws`. sigma'(t) = 0 for t <= 0, 1 for t > 0.
inline void backward_accumulate(const Parameters& params, const EvalWorkspace& ws,
                                double seed, double* grad,
                                std::vector<double>& delta_buf) {
    const Architecture& a = params.arch;
    const int L = a.depth();
    delta_buf[ws.pre_off[L - 1]] = seed;
    for (int l = L; l >= 1; --l) {
        const int nin = a.widths[l - 1];
        const int nout = a.widths[l];
        const double* p = params.theta.data() + params.layer_offset(l);
        double* g = grad + params.layer_offset(l);
        const double* in = l == 1 ? ws.act.data() : ws.act.data() + ws.act_off[l - 2];
        const double* d = delta_buf.data() + ws.pre_off[l - 1];
        for (int i = 0; i < nout; ++i) {
            const double di = d[i];
            double* grow = g + static_cast<std::size_t>(i) * (nin + 1);
            for (int j = 0; j < nin; ++j) grow[j] += di * in[j];
            grow[nin] -= di;  // z = wx - b
        }
        if (l > 1) {
            double* dprev = delta_buf.data() + ws.pre_off[l - 2];
            const double* zprev = ws.pre.data() + ws.pre_off[l - 2];
            for (int j = 0; j < nin; ++j) {
                double s = 0.0;
                for (int i = 0; i < nout; ++i)
                    s += p[static_cast<std::size_t>(i) * (nin + 1) + j] * d[i];
                dprev[j] = zprev[j] > 0.0 ? s : 0.0;
            }
        }
    }
}

/// dN(x)/dtheta for every parameter, flattened in the storage order.
inline std::vector<double> parameter_gradient(const Parameters& params, Vec2 x) {
    EvalWorkspace ws(params.arch);
    forward(params, x, ws);
    std::vector<double> grad(params.theta.size(), 0.0);
    backward_accumulate(params, ws, 1.0, grad.data(), ws.delta);
    return grad;
}

/// Values and input-space gradients of the last-hidden-layer activations,
/// with all layers up to L-1 frozen. Used to assemble the output-layer
/// Galerkin system for deep networks.
inline void hidden_activations_and_jacobian(const Parameters& params, Vec2 x,
                                            std::vector<double>& values,
                                            std::vector<Vec2>& jac) {
    const Architecture& a = params.arch;
    const int L = a.depth();
    std::vector<double> in = {x.x, x.y};
    std::vector<Vec2> jin = {{1.0, 0.0}, {0.0, 1.0}};
    for (int l = 1; l < L; ++l) {
        const int nin = a.widths[l - 1];
        const int nout = a.widths[l];
        std::vector<double> out(nout);
        std::vector<Vec2> jout(nout);
        for (int i = 0; i < nout; ++i) {
            double z = -params.bias(l, i);
            Vec2 jz{0.0, 0.0};
            for (int j = 0; j < nin; ++j) {
                const double w = params.weight(l, i, j);
                z += w * in[j];
                jz = jz + w * jin[j];
            }
            if (z > 0.0) {
                out[i] = z;
                jout[i] = jz;
            } else {
                out[i] = 0.0;
                jout[i] = {0.0, 0.0};
            }
        }
        in = std::move(out);
        jin = std::move(jout);
    }
    values = std::move(in);
    jac = std::move(jin);
}

// ---------------------------------------------------------------------------
// Analytic step constructions
// ---------------------------------------------------------------------------

/// Two-neuron ramp realizing a smeared plane jump:
///   p(x) = lo + (hi-lo)/(2 eps) * (relu(n.x - c + eps) - relu(n.x - c - eps)),
/// i.e. p == lo on {n.x <= c - eps}, p == hi on {n.x >= c + eps}, linear between.
struct RampStepSpec {
    Vec2 normal;        // xi
    double offset;      // c
    double lo, hi;      // values on either side
    double half_width;  // eps > 0
};

inline Parameters ramp_step_network(const RampStepSpec& s) {
    if (!(s.half_width > 0.0))
        throw ConfigError("ramp_step_network: half_width must be positive");
    Parameters p(Architecture({2, 2, 1}));
    const double slope = (s.hi - s.lo) / (2.0 * s.half_width);
    for (int i = 0; i < 2; ++i) {
        p.weight(1, i, 0) = s.normal.x;
        p.weight(1, i, 1) = s.normal.y;
    }
    p.bias(1, 0) = s.offset - s.half_width;
    p.bias(1, 1) = s.offset + s.half_width;
    p.weight(2, 0, 0) = slope;
    p.weight(2, 0, 1) = -slope;
    p.bias(2, 0) = -s.lo;
    return p;
}

/// max{p1, p2} of two ramps sharing the offset and values, realized exactly by a
/// 2-4-4-1 network: the first hidden layer holds the four ramp neurons, the second
/// applies the four-neuron max gadget
///   max{a,b} = 1/2 (relu(a+b) - relu(-a-b) + relu(a-b) + relu(b-a)).
struct RampStepMaxSpec {
    Vec2 normal1, normal2;  // xi_1, xi_2
    double offset;          // shared a
    double lo, hi;
    double half_width;  // eps > 0
};

inline Parameters ramp_step_max_network(const RampStepMaxSpec& s) {
    if (!(s.half_width > 0.0))
        throw ConfigError("ramp_step_max_network: half_width must be positive");
    Parameters p(Architecture({2, 4, 4, 1}));
    const double k = (s.hi - s.lo) / (2.0 * s.half_width);

    const Vec2 normals[2] = {s.normal1, s.normal2};
    for (int r = 0; r < 2; ++r) {
        for (int two = 0; two < 2; ++two) {
            const int i = 2 * r + two;
            p.weight(1, i, 0) = normals[r].x;
            p.weight(1, i, 1) = normals[r].y;
            p.bias(1, i) = s.offset + (two == 0 ? -s.half_width : +s.half_width);
        }
    }

    // p_r = lo + k a_{2r} - k a_{2r+1}; gadget rows act on (p_1, p_2).
    const double gadget[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    for (int i = 0; i < 4; ++i) {
        p.weight(2, i, 0) = gadget[i][0] * k;
        p.weight(2, i, 1) = -gadget[i][0] * k;
        p.weight(2, i, 2) = gadget[i][1] * k;
        p.weight(2, i, 3) = -gadget[i][1] * k;
        p.bias(2, i) = -(gadget[i][0] + gadget[i][1]) * s.lo;
    }

    p.weight(3, 0, 0) = 0.5;
    p.weight(3, 0, 1) = -0.5;
    p.weight(3, 0, 2) = 0.5;
    p.weight(3, 0, 3) = 0.5;
    p.bias(3, 0) = 0.0;
    return p;
}

// ---------------------------------------------------------------------------
// Breaking lines
// ---------------------------------------------------------------------------

/// One straight piece of a breaking line, tagged by its (layer, neuron).
struct BreakingSegment {
    int layer;
    int neuron;
    Vec2 a, b;
};

namespace detail {

/// Clips the line w.x = b to the rectangle; empty if no intersection.
inline bool clip_line_to_domain(Vec2 w, double b, const Domain& dom, Vec2& p0, Vec2& p1) {
    if (std::abs(w.x) < 1e-300 && std::abs(w.y) < 1e-300) return false;
    const Vec2 corners[4] = {{dom.x_lo, dom.y_lo},
                             {dom.x_hi, dom.y_lo},
                             {dom.x_hi, dom.y_hi},
                             {dom.x_lo, dom.y_hi}};
    std::vector<Vec2> pts;
    for (int e = 0; e < 4; ++e) {
        const Vec2 a = corners[e], c = corners[(e + 1) % 4];
        const double sa = dot(w, a) - b, sc = dot(w, c) - b;
        if (sa == 0.0) pts.push_back(a);
        if ((sa < 0.0 && sc > 0.0) || (sa > 0.0 && sc < 0.0)) {
            const double t = sa / (sa - sc);
            pts.push_back({a.x + t * (c.x - a.x), a.y + t * (c.y - a.y)});
        }
    }
    // pick the farthest pair among collected intersections
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = norm(pts[i] - pts[j]);
            if (d > best) {
                best = d;
                p0 = pts[i];
                p1 = pts[j];
            }
        }
    return best > 1e-12;
}

}  // namespace detail

/// Zero sets of hidden-neuron pre-activations clipped to the domain.
/// First-layer neurons give exact segments; deeper hidden neurons are contoured
/// by marching squares on a (grid x grid) sampling lattice, fine enough to
/// resolve mesh-scale features.
inline std::vector<BreakingSegment> breaking_lines(const Parameters& params,
                                                   const Domain& dom, int grid = 400) {
    const Architecture& a = params.arch;
    const int L = a.depth();
    std::vector<BreakingSegment> segs;

    for (int i = 0; i < a.widths[1]; ++i) {
        Vec2 p0, p1;
        if (detail::clip_line_to_domain({params.weight(1, i, 0), params.weight(1, i, 1)},
                                        params.bias(1, i), dom, p0, p1))
            segs.push_back({1, i, p0, p1});
    }
    if (L == 2) return segs;

    // deeper hidden layers: contour z = 0 row pair by row pair
    int hidden_total = 0;
    for (int l = 2; l < L; ++l) hidden_total += a.widths[l];
    const int nx = grid, ny = grid;
    const double dx = dom.width() / nx, dy = dom.height() / ny;

    EvalWorkspace ws(a);
    std::vector<std::vector<double>> rows(2, std::vector<double>((nx + 1) * hidden_total));
    auto fill_row = [&](int j, std::vector<double>& row) {
        const double y = dom.y_lo + j * dy;
        for (int i = 0; i <= nx; ++i) {
            forward(params, {dom.x_lo + i * dx, y}, ws);
            int k = 0;
            for (int l = 2; l < L; ++l)
                for (int q = 0; q < a.widths[l]; ++q)
                    row[static_cast<std::size_t>(i) * hidden_total + k++] =
                        ws.pre[ws.pre_off[l - 1] + q];
        }
    };

    // (layer, neuron) pairs in a fixed order matching the row storage
    std::vector<std::pair<int, int>> tags;
    for (int l = 2; l < L; ++l)
        for (int q = 0; q < a.widths[l]; ++q) tags.emplace_back(l, q);

    fill_row(0, rows[0]);
    for (int j = 0; j < ny; ++j) {
        fill_row(j + 1, rows[(j + 1) % 2]);
        const std::vector<double>& lo = rows[j % 2];
        const std::vector<double>& hi = rows[(j + 1) % 2];
        const double y0 = dom.y_lo + j * dy, y1 = y0 + dy;
        for (int i = 0; i < nx; ++i) {
            const double x0 = dom.x_lo + i * dx, x1 = x0 + dx;
            for (int k = 0; k < hidden_total; ++k) {
                const double z00 = lo[static_cast<std::size_t>(i) * hidden_total + k];
                const double z10 = lo[static_cast<std::size_t>(i + 1) * hidden_total + k];
                const double z01 = hi[static_cast<std::size_t>(i) * hidden_total + k];
                const double z11 = hi[static_cast<std::size_t>(i + 1) * hidden_total + k];
                const int c = (z00 > 0) | ((z10 > 0) << 1) | ((z11 > 0) << 2) | ((z01 > 0) << 3);
                if (c == 0 || c == 15) continue;
                auto interp = [](double p, double q) { return p / (p - q); };
                const Vec2 bottom{x0 + interp(z00, z10) * dx, y0};
                const Vec2 top{x0 + interp(z01, z11) * dx, y1};
                const Vec2 left{x0, y0 + interp(z00, z01) * dy};
                const Vec2 right{x1, y0 + interp(z10, z11) * dy};
                auto emit = [&](Vec2 pa, Vec2 pb) {
                    segs.push_back({tags[k].first, tags[k].second, pa, pb});
                };
                switch (c) {
                    case 1: case 14: emit(left, bottom); break;
                    case 2: case 13: emit(bottom, right); break;
                    case 3: case 12: emit(left, right); break;
                    case 4: case 11: emit(top, right); break;
                    case 6: case 9:  emit(bottom, top); break;
                    case 7: case 8:  emit(left, top); break;
                    case 5: case 10: {
                        // saddle: split by the cell-center sign
                        const double zc = 0.25 * (z00 + z10 + z01 + z11);
                        const bool center = zc > 0;
                        if ((c == 5) == center) {
                            emit(left, bottom);
                            emit(top, right);
                        } else {
                            emit(left, top);
                            emit(bottom, right);
                        }
                        break;
                    }
                    default: break;
                }
            }
        }
    }
    return segs;
}

// ---------------------------------------------------------------------------
// Checkpoint format (text, line oriented):
//   LSNN-CKPT 1
//   arch n0 n1 ... nL
//   layer 1
//   <n1 lines: row of omega then the bias entry, 17 significant digits>
//   layer 2
//   ...
// Round-trips are bit-faithful at double precision.
// ---------------------------------------------------------------------------

inline void save_checkpoint(const Parameters& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_checkpoint: cannot open " + path);
    out << "LSNN-CKPT 1\n";
    out << "arch";
    for (int w : params.arch.widths) out << ' ' << w;
    out << '\n';
    char buf[40];
    for (int l = 1; l <= params.arch.depth(); ++l) {
        out << "layer " << l << '\n';
        const int nin = params.arch.widths[l - 1];
        for (int i = 0; i < params.arch.widths[l]; ++i) {
            for (int j = 0; j <= nin; ++j) {
                const double v = j < nin ? params.weight(l, i, j) : params.bias(l, i);
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << buf << (j == nin ? '\n' : ' ');
            }
        }
    }
    if (!out) throw ConfigError("save_checkpoint: write failed for " + path);
}

inline Parameters load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_checkpoint: cannot open " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "LSNN-CKPT" || version != 1)
        throw ConfigError("load_checkpoint: bad header in " + path);
    std::string kw;
    in >> kw;
    if (kw != "arch") throw ConfigError("load_checkpoint: missing arch line");
    std::string rest;
    std::getline(in, rest);
    std::vector<int> widths;
    std::stringstream ss(rest);
    int w;
    while (ss >> w) widths.push_back(w);
    Parameters params{Architecture(widths)};
    for (int l = 1; l <= params.arch.depth(); ++l) {
        int lid = 0;
        in >> kw >> lid;
        if (kw != "layer" || lid != l)
            throw ConfigError("load_checkpoint: malformed layer header");
        const int nin = params.arch.widths[l - 1];
        for (int i = 0; i < params.arch.widths[l]; ++i)
            for (int j = 0; j <= nin; ++j) {
                double v;
                if (!(in >> v)) throw ConfigError("load_checkpoint: truncated file");
                if (j < nin)
                    params.weight(l, i, j) = v;
                else
                    params.bias(l, i) = v;
            }
    }
    return params;
}

}  // namespace lsnn
