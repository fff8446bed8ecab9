import org.junit.Test;

public class LonerCheck {
    @Test
    public void arithmeticHolds() {
        assertEquals(2, 1 + 1);
    }
}
