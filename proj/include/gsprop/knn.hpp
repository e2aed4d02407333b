#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace gsprop {

// 3-d kd-tree over a fixed point set. Build is O(n log n); queries are fine
// for the scene sizes handled here (tested to a few hundred thousand points).
class KdTree3 {
public:
    explicit KdTree3(std::span<const Eigen::Vector3f> points);

    // Indices of up to k nearest points to q, nearest first. `exclude` drops
    // one index (typically the query point itself).
    std::vector<int> nearest(const Eigen::Vector3f& q, int k, int exclude = -1) const;

    // Distance from points[i] to its nearest other point.
    float nearest_neighbor_distance(int i) const;

private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1, right = -1;
    };

    int build(int begin, int end, int depth);

    std::vector<Eigen::Vector3f> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace gsprop
