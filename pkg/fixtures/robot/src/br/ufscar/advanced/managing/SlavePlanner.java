package br.ufscar.advanced.managing;

public class SlavePlanner {
    public double plan() {
        ProximityReference target = new ProximityReference();
        double threshold = target.lowerBound();
        return threshold;
    }
}
