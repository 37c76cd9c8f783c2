#pragma once

#include <cmath>
#include <vector>

#include "brainnet/core.hpp"
#include "brainnet/network.hpp"
#include "brainnet/parcellate.hpp"
#include "brainnet/rng.hpp"
#include "brainnet/spatial_graph.hpp"

namespace brainnet {

struct PhantomParams {
    Dims dims{12, 12, 12};
    int blocks = 4;
    double within_mean = 5.0;
    double cross_mean = 1.0;
    double noise_sd = 0.5;
    /// Only voxel pairs at most this far apart get a streamline weight.
    double conn_radius = 12.0;
    /// When positive, every sampled weight is scaled by exp(-distance / decay_length).
    double decay_length = 0.0;
};

/// Synthetic mask, planted ground-truth parcellation, and voxel connectivity.
struct Phantom {
    VoxelMask mask;
    Parcellation ground_truth;
    SparseSymMatrix conn;
};

/// Cuboid mask cut into `blocks` contiguous regions by random region growing.
/// Each voxel pair within conn_radius receives max(0, N(mean, sd)) streamlines,
/// with mean = within_mean inside a block and cross_mean across blocks.
inline Phantom generate_phantom(const PhantomParams& p, Rng& rng) {
    if (!(p.within_mean > p.cross_mean) || p.cross_mean < 0.0)
        throw InvalidInput("generate_phantom: need within_mean > cross_mean >= 0");
    if (p.noise_sd < 0.0) throw InvalidInput("generate_phantom: noise_sd must be non-negative");
    if (p.conn_radius < 1.0) throw InvalidInput("generate_phantom: conn_radius must be at least 1");
    if (p.dims.nx <= 0 || p.dims.ny <= 0 || p.dims.nz <= 0) throw InvalidInput("generate_phantom: invalid dims");
    if (p.blocks < 1 || p.blocks > p.dims.volume())
        throw InvalidInput("generate_phantom: block count must be between 1 and the voxel count");

    Phantom ph;
    ph.mask = VoxelMask::cuboid(p.dims);
    ph.ground_truth = random_parcellation(ph.mask, p.blocks, rng);

    std::vector<Offset> forward;
    for (const auto& o : neighbor_offsets(p.conn_radius))
        if (o.dz > 0 || (o.dz == 0 && (o.dy > 0 || (o.dy == 0 && o.dx > 0)))) forward.push_back(o);

    std::vector<Triplet> trips;
    for (std::size_t i = 0; i < ph.mask.size(); ++i) {
        const Coord c = ph.mask.coord(i);
        for (const auto& o : forward) {
            const Index j = ph.mask.index_of({c.x + o.dx, c.y + o.dy, c.z + o.dz});
            if (j < 0) continue;
            const bool same = ph.ground_truth.label(i) == ph.ground_truth.label(static_cast<std::size_t>(j));
            double w = std::max(0.0, rng.normal(same ? p.within_mean : p.cross_mean, p.noise_sd));
            if (p.decay_length > 0.0)
                w *= std::exp(-std::sqrt(double(o.dx * o.dx + o.dy * o.dy + o.dz * o.dz)) / p.decay_length);
            if (w > 0.0) trips.push_back({static_cast<Index>(i), j, w});
        }
    }
    ph.conn = SparseSymMatrix::from_triplets(static_cast<Index>(ph.mask.size()), trips);
    return ph;
}

/// Region-level network with `modules` equal-size communities (node i in
/// module i % modules). Off-diagonal weights are max(0, N(mean, sd)) with
/// mean = within inside a module and cross between modules.
inline BrainNetwork block_network(int nodes, int modules, double within, double cross, double sd, Rng& rng) {
    if (nodes < 2 || modules < 1 || modules > nodes) throw InvalidInput("block_network: invalid sizes");
    if (within < 0.0 || cross < 0.0 || sd < 0.0) throw InvalidInput("block_network: negative parameter");
    BrainNetwork net;
    net.weights = Eigen::MatrixXd::Zero(nodes, nodes);
    net.region_sizes.assign(static_cast<std::size_t>(nodes), 1);
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j) {
            const double w = std::max(0.0, rng.normal(i % modules == j % modules ? within : cross, sd));
            net.weights(i, j) = net.weights(j, i) = w;
        }
    return net;
}

}  // namespace brainnet
