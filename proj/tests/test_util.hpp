#pragma once

#include "rbmfeat/models.hpp"

namespace rbmf::testutil {

inline RbmParams random_rbm(int nv, int nh, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    RbmParams p;
    p.W = Mat::NullaryExpr(nv, nh, [&] { return u(rng); });
    p.a = Vec::NullaryExpr(nv, [&] { return u(rng); });
    p.b = Vec::NullaryExpr(nh, [&] { return u(rng); });
    return p;
}

inline GrbmParams random_grbm(int nv, int nh, Rng& rng, double scale = 0.5,
                              bool unit_sigma = true) {
    std::uniform_real_distribution<double> u(-scale, scale);
    GrbmParams p;
    p.W = Mat::NullaryExpr(nv, nh, [&] { return u(rng); });
    p.a = Vec::NullaryExpr(nv, [&] { return u(rng); });
    p.b = Vec::NullaryExpr(nh, [&] { return u(rng); });
    if (unit_sigma) {
        p.sigma = Vec::Ones(nv);
    } else {
        std::uniform_real_distribution<double> us(0.5, 2.0);
        p.sigma = Vec::NullaryExpr(nv, [&] { return us(rng); });
    }
    return p;
}

inline MgrbmParams random_mgrbm(int nv, int d, int nh, Rng& rng,
                                double scale = 0.3) {
    std::uniform_real_distribution<double> u(-scale, scale);
    MgrbmParams p;
    p.nv = nv;
    p.d = d;
    p.nh = nh;
    p.b = Vec::NullaryExpr(nh, [&] { return u(rng); });
    for (int i = 0; i < nv; ++i) {
        p.mu.push_back(Vec::NullaryExpr(d, [&] { return u(rng); }));
        Mat b_i = Mat::Identity(d, d);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                if (r != c) b_i(r, c) = u(rng);
            }
        }
        p.B.push_back(b_i);
        p.W.push_back(Mat::NullaryExpr(d, nh, [&] { return u(rng); }));
    }
    return p;
}

inline Vec random_binary(int n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = coin(rng) ? 1.0 : 0.0;
    return v;
}

inline Vec random_real(int n, Rng& rng, double scale = 1.5) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return Vec::NullaryExpr(n, [&] { return u(rng); });
}

}  // namespace rbmf::testutil
