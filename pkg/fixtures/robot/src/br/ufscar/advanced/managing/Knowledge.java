package br.ufscar.advanced.managing;

public class Knowledge {
    private double lastDistance;

    public void store(double value) {
        lastDistance = value;
    }

    public double lastReading() {
        return lastDistance;
    }
}
