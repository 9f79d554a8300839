package br.ufscar.advanced.managing;

public class ProximityReference {
    private double lowerLimit = 0.3;
    private double upperLimit = 0.5;

    public double lowerBound() {
        return lowerLimit;
    }

    public double upperBound() {
        return upperLimit;
    }
}
