// Copyright 2026 The kacsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kac {

struct GaussRule
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t order() const { return nodes.size(); }
};

//! n-point rule for the standard normal measure; weights sum to one.
GaussRule gauss_hermite(std::size_t n);
//! n-point rule for dx on [-1, 1].
GaussRule gauss_legendre(std::size_t n);

/*!
 * Visit every node of the dim-fold tensor product of `rule` as
 * fn(point, weight). The visiting order is fixed (last coordinate fastest).
 */
template <class Fn>
void for_each_tensor_node(GaussRule const& rule, std::size_t dim, Fn&& fn)
{
    std::size_t const q = rule.order();
    std::vector<std::size_t> idx(dim, 0);
    std::vector<double> x(dim);
    if (dim == 0)
    {
        fn(std::span<double const>(x), 1.0);
        return;
    }
    for (;;)
    {
        double w = 1.0;
        for (std::size_t k = 0; k < dim; ++k)
        {
            x[k] = rule.nodes[idx[k]];
            w *= rule.weights[idx[k]];
        }
        fn(std::span<double const>(x), w);
        std::size_t k = dim;
        while (k > 0)
        {
            --k;
            if (++idx[k] < q)
                break;
            idx[k] = 0;
            if (k == 0)
                return;
        }
    }
}

} // namespace kac
