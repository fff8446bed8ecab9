import org.junit.Test;

public class GreedyCheck {
    @Test
    public void coversTwoThings() {
        assertEquals(12, new Gadget().weight());
        assertEquals("a", new Alpha().label());
    }
}
